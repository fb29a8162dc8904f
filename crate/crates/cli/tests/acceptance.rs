//! Acceptance suite. Runs every criterion, prints one line each and exits
//! nonzero if any fails.

use std::collections::BTreeMap;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use edge_auction::auction::TrainConfig;
use edge_auction::baselines::{
    expected_revenue_mc, FirstPrice, MyersonReserve, SecondPrice, UniformSampler, Vcg,
};
use edge_auction::eval::{exact_regret_grid, run_cell, CellResult, EvalConfig};
use edge_auction::market::{
    semantic_payload_bits, REFERENCE_BOX_BITS, REFERENCE_RAW_IMAGE_BITS, REFERENCE_TEXT_BITS,
};
use edge_auction::mechanism::Mechanism;
use edge_auction::nn::{finite_diff_gradient, Activation, DenseNet};
use edge_auction::rng::rng_from;
use edge_auction::tolerances::{relative_error, TOLERANCES};
use edge_auction::MarketConfig;
use rand::seq::SliceRandom;
use rand::Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn gradient_check() -> Outcome {
    let mut rng = rng_from(2024);
    let hiddens = [Activation::Tanh, Activation::Relu];
    let outputs = [
        Activation::Linear,
        Activation::Sigmoid,
        Activation::Softplus,
    ];
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    let mut redraws = 0;
    for case in 0..25 {
        let depth = rng.gen_range(1..=3);
        let mut sizes = vec![rng.gen_range(1..=4)];
        sizes.extend((0..depth).map(|_| rng.gen_range(1..=5)));
        let hidden = *hiddens.choose(&mut rng).unwrap();
        let output = *outputs.choose(&mut rng).unwrap();
        let mut net = DenseNet::new(&sizes, hidden, output, 100 + case).unwrap();
        let params: Vec<f64> = (0..net.n_params())
            .map(|_| rng.gen_range(-1.0..1.0))
            .collect();
        net.set_params_flat(&params).unwrap();
        // finite differences are meaningless at a ReLU kink; redraw such inputs
        let x = loop {
            let x: Vec<f64> = (0..sizes[0]).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let trace = net.forward_trace(&x).unwrap();
            let near_kink = hidden == Activation::Relu
                && trace.pre_activations()[..sizes.len() - 2]
                    .iter()
                    .flatten()
                    .any(|z| z.abs() < 1e-3);
            if !near_kink {
                break x;
            }
            redraws += 1;
        };
        let up: Vec<f64> = (0..net.output_width())
            .map(|_| rng.gen_range(-1.0..1.0))
            .collect();
        let grads = net.backprop(&x, &up).unwrap();
        let dot = |y: Vec<f64>| y.iter().zip(&up).map(|(a, b)| a * b).sum::<f64>();

        let params = net.params_flat();
        let fd_params = finite_diff_gradient(
            |p| {
                let mut probe = net.clone();
                probe.set_params_flat(p).unwrap();
                dot(probe.forward(&x).unwrap())
            },
            &params,
            TOLERANCES.fd_step,
        )
        .unwrap();
        let fd_input =
            finite_diff_gradient(|xi| dot(net.forward(xi).unwrap()), &x, TOLERANCES.fd_step)
                .unwrap();
        let analytic = grads.flat().into_iter().chain(grads.input.clone().unwrap());
        for (a, f) in analytic.zip(fd_params.into_iter().chain(fd_input)) {
            worst = worst.max(relative_error(a, f));
            checked += 1;
        }
    }
    outcome(
        worst <= TOLERANCES.grad_rel,
        format!(
            "{checked} partials on 25 networks, worst relative error {worst:.2e} (limit {:.0e}); {redraws} inputs redrawn off ReLU kinks",
            TOLERANCES.grad_rel
        ),
    )
}

fn analytic_anchors() -> Outcome {
    let sampler = UniformSampler { n_bidders: 2 };
    let sp = expected_revenue_mc(&SecondPrice { n_bidders: 2 }, &sampler, 1_000_000, 11).unwrap();
    let my = expected_revenue_mc(
        &MyersonReserve {
            n_bidders: 2,
            reserve: 0.5,
        },
        &sampler,
        1_000_000,
        12,
    )
    .unwrap();
    let ok = (sp - 1.0 / 3.0).abs() <= 0.002 && (my - 5.0 / 12.0).abs() <= 0.002;
    outcome(
        ok,
        format!("second-price {sp:.5} (1/3), myerson r=0.5 {my:.5} (5/12), tolerance 0.002"),
    )
}

fn strategy_proofness() -> Outcome {
    let mut rng = rng_from(77);
    let n = 3;
    let step = TOLERANCES.grid_step;
    let truthful: Vec<(&str, Box<dyn Mechanism>)> = vec![
        (
            "vcg",
            Box::new(Vcg {
                n_bidders: n,
                n_units: 3,
                unit_cap: None,
            }),
        ),
        ("second-price", Box::new(SecondPrice { n_bidders: n })),
        (
            "myerson",
            Box::new(MyersonReserve {
                n_bidders: n,
                reserve: 0.5,
            }),
        ),
    ];
    let mut worst = BTreeMap::new();
    for _ in 0..100 {
        let values: Vec<f64> = (0..n).map(|_| rng.gen()).collect();
        for (name, mech) in &truthful {
            for bidder in 0..n {
                let r = exact_regret_grid(mech.as_ref(), &values, bidder, step).unwrap();
                let w = worst.entry(*name).or_insert(0.0f64);
                *w = w.max(r);
            }
        }
    }
    let mut fp_min = f64::INFINITY;
    let mut fp_profiles = 0;
    let fp = FirstPrice { n_bidders: n };
    while fp_profiles < 100 {
        let values: Vec<f64> = (0..n).map(|_| rng.gen()).collect();
        let mut sorted = values.clone();
        sorted.sort_by(|a, b| b.total_cmp(a));
        if sorted[0] - sorted[1] <= 0.1 {
            continue;
        }
        let top = values.iter().position(|&v| v == sorted[0]).unwrap();
        fp_min = fp_min.min(exact_regret_grid(&fp, &values, top, step).unwrap());
        fp_profiles += 1;
    }
    let truthful_ok = worst.values().all(|&r| r <= 1e-3);
    let detail = format!(
        "max grid regret {} ; first-price min winner regret {fp_min:.4} over {fp_profiles} wide-gap profiles",
        worst.iter().map(|(k, v)| format!("{k} {v:.1e}")).collect::<Vec<_>>().join(", ")
    );
    outcome(truthful_ok && fp_min > 0.05, detail)
}

/// Mean revenue on `cell`'s held-out set of VCG with the best uniform
/// reserve, the optimal mechanism's revenue for i.i.d. regular values.
fn best_reserve_revenue(cell: &CellResult) -> f64 {
    let m = cell.market.n_units as f64;
    (0..=1000)
        .map(|k| {
            let r = k as f64 / 1000.0;
            let total: f64 = cell
                .heldout
                .iter()
                .map(|p| {
                    let mut v = p.values.clone();
                    v.sort_by(|a, b| b.total_cmp(a));
                    if v[0] < r {
                        0.0
                    } else {
                        m * v.get(1).copied().unwrap_or(0.0).max(r)
                    }
                })
                .sum();
            total / cell.heldout.len() as f64
        })
        .fold(0.0, f64::max)
}

struct Cells {
    train: TrainConfig,
    eval: EvalConfig,
    done: BTreeMap<(usize, usize, bool), (CellResult, Duration)>,
}

impl Cells {
    fn get(&mut self, n_vsps: usize, n_apps: usize, semcom: bool) -> &(CellResult, Duration) {
        let (train, eval) = (&self.train, &self.eval);
        self.done.entry((n_vsps, n_apps, semcom)).or_insert_with(|| {
            let market = MarketConfig::case_study()
                .with_n_vsps(n_vsps)
                .with_n_apps(n_apps)
                .with_semcom(semcom);
            let start = Instant::now();
            let cell = run_cell(&market, train, eval).expect("training cell");
            let elapsed = start.elapsed();
            println!(
                "  cell N={n_vsps} A={n_apps} semcom={semcom}: learned {:.4} vcg {:.4} ir {:.4} regret {:.4} ({:.0?})",
                cell.learned.mean_revenue, cell.vcg.mean_revenue, cell.learned.mean_ir_penalty, cell.learned.max_regret, elapsed
            );
            (cell, elapsed)
        })
    }
}

fn beats_vcg(cells: &mut Cells) -> Outcome {
    let (cell, elapsed) = cells.get(5, 3, true);
    let ratio = cell.learned.mean_revenue / cell.vcg.mean_revenue;
    let bound = best_reserve_revenue(cell) / cell.vcg.mean_revenue;
    outcome(
        ratio >= 1.05 && elapsed.as_secs_f64() < 1800.0,
        format!(
            "learned {:.4} / vcg {:.4} = {ratio:.4} (need 1.05); best-reserve optimum / vcg = {bound:.4}; {:.0?}",
            cell.learned.mean_revenue, cell.vcg.mean_revenue, elapsed
        ),
    )
}

fn near_zero_penalties(cells: &mut Cells) -> Outcome {
    let (cell, _) = cells.get(5, 3, true);
    let r = &cell.learned;
    outcome(
        r.mean_ir_penalty <= TOLERANCES.ir_threshold && r.max_regret <= TOLERANCES.regret_threshold,
        format!(
            "ir {:.5}, max per-bidder regret {:.5} (limits 0.02); mean {:.5}, worst single profile {:.4}",
            r.mean_ir_penalty, r.max_regret, r.mean_regret, r.worst_case_regret
        ),
    )
}

fn semcom_ordering(cells: &mut Cells) -> Outcome {
    let on = cells.get(5, 3, true).0.clone();
    let off = cells.get(5, 3, false).0.clone();
    let paired = on.heldout.len() == off.heldout.len()
        && on
            .heldout
            .iter()
            .zip(&off.heldout)
            .all(|(a, b)| a.values.iter().zip(&b.values).all(|(x, y)| x <= y));
    let penalties = [&on, &off].iter().all(|c| {
        c.learned.mean_ir_penalty <= TOLERANCES.ir_threshold
            && c.learned.max_regret <= TOLERANCES.regret_threshold
    });
    outcome(
        on.learned.mean_revenue < off.learned.mean_revenue && paired,
        format!(
            "revenue semcom {:.4} < raw {:.4}; mean valuation {:.4} vs {:.4}, elementwise ordered: {paired}; both within penalty limits: {penalties}",
            on.learned.mean_revenue,
            off.learned.mean_revenue,
            on.mean_valuation(),
            off.mean_valuation()
        ),
    )
}

fn nondecreasing(revenues: &[f64]) -> bool {
    revenues
        .windows(2)
        .all(|w| w[1] >= (1.0 - TOLERANCES.trend_band) * w[0])
}

fn trends(cells: &mut Cells) -> Outcome {
    let by_n: Vec<f64> = (2..=5)
        .map(|n| cells.get(n, 3, true).0.learned.mean_revenue)
        .collect();
    let by_a: Vec<f64> = (1..=3)
        .map(|a| cells.get(5, a, true).0.learned.mean_revenue)
        .collect();
    let fmt = |v: &[f64]| {
        v.iter()
            .map(|x| format!("{x:.4}"))
            .collect::<Vec<_>>()
            .join(" ")
    };
    outcome(
        nondecreasing(&by_n) && nondecreasing(&by_a),
        format!(
            "revenue over N=2..5: {} ; over A=1..3: {} (5% band)",
            fmt(&by_n),
            fmt(&by_a)
        ),
    )
}

fn payload_anchor() -> Outcome {
    let bits = semantic_payload_bits(REFERENCE_RAW_IMAGE_BITS, &MarketConfig::case_study());
    let expected = REFERENCE_BOX_BITS + REFERENCE_TEXT_BITS;
    outcome(
        bits == expected && expected == 0.65e6 * 8.0 + 56.0 * 8.0,
        format!("{bits} bits for a 3.59 MB image, expected {expected}"),
    )
}

fn run_cli(args: &[&str]) -> bool {
    Command::new(env!("CARGO_BIN_EXE_edge-auction"))
        .args(args)
        .status()
        .map(|s| s.success())
        .unwrap_or(false)
}

/// Manifest bytes with the wall-clock and argument fields dropped.
fn manifest_core(dir: &Path) -> serde_json::Value {
    let text = std::fs::read_to_string(dir.join("manifest.json")).unwrap();
    let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
    let obj = v.as_object_mut().unwrap();
    obj.remove("timestamps");
    obj.remove("args");
    v
}

fn determinism() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let root = tmp.path();
    let train_cfg = TrainConfig {
        iterations: 60,
        dataset_size: 256,
        eval_every: 20,
        ..TrainConfig::desk_scale()
    };
    let train_path = root.join("train.json");
    std::fs::write(&train_path, serde_json::to_string(&train_cfg).unwrap()).unwrap();
    let train_path = train_path.to_str().unwrap();

    let mut mismatches = Vec::new();
    let mut dirs = Vec::new();
    for run in ["a", "b"] {
        let sim = root.join(format!("sim_{run}"));
        let trn = root.join(format!("train_{run}"));
        let ok = run_cli(&[
            "simulate",
            "--count",
            "1000",
            "--seed",
            "1",
            "--out",
            sim.to_str().unwrap(),
        ]) && run_cli(&[
            "train",
            "--train-config",
            train_path,
            "--seed",
            "3",
            "--out",
            trn.to_str().unwrap(),
        ]);
        if !ok {
            return outcome(false, format!("cli run {run} failed"));
        }
        dirs.push((sim, trn));
    }
    let (a, b) = (&dirs[0], &dirs[1]);
    let compared = [
        (a.0.join("valuations.csv"), b.0.join("valuations.csv")),
        (a.1.join("model.json"), b.1.join("model.json")),
        (a.1.join("metrics.csv"), b.1.join("metrics.csv")),
    ];
    for (x, y) in &compared {
        if std::fs::read(x).unwrap() != std::fs::read(y).unwrap() {
            mismatches.push(x.file_name().unwrap().to_string_lossy().into_owned());
        }
    }
    if manifest_core(&a.0) != manifest_core(&b.0) || manifest_core(&a.1) != manifest_core(&b.1) {
        mismatches.push("manifest".to_string());
    }
    let rows = std::fs::read_to_string(dirs[0].0.join("valuations.csv"))
        .unwrap()
        .lines()
        .count()
        - 1;
    outcome(
        mismatches.is_empty() && rows == 5000,
        format!("simulate ({rows} rows) and train outputs byte-identical across re-runs; mismatches: {mismatches:?}"),
    )
}

fn main() {
    // libtest-style flags (e.g. --nocapture) are accepted and ignored
    let mut cells = Cells {
        train: TrainConfig::desk_scale(),
        eval: EvalConfig::default(),
        done: BTreeMap::new(),
    };
    type Check<'a> = Box<dyn FnMut(&mut Cells) -> Outcome + 'a>;
    let criteria: Vec<(&str, Option<f64>, Check)> = vec![
        (
            "gradient correctness",
            Some(10.0),
            Box::new(|_| gradient_check()),
        ),
        (
            "analytic auction anchors",
            Some(30.0),
            Box::new(|_| analytic_anchors()),
        ),
        (
            "strategy-proofness oracle",
            Some(60.0),
            Box::new(|_| strategy_proofness()),
        ),
        ("learned auction beats vcg", None, Box::new(beats_vcg)),
        ("near-zero penalties", None, Box::new(near_zero_penalties)),
        ("semcom ordering", None, Box::new(semcom_ordering)),
        ("revenue trends", None, Box::new(trends)),
        ("payload anchor", None, Box::new(|_| payload_anchor())),
        ("determinism", None, Box::new(|_| determinism())),
    ];
    let mut failed = 0;
    for (k, (name, budget, mut check)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let mut result = check(&mut cells);
        let secs = start.elapsed().as_secs_f64();
        if let Some(limit) = budget {
            if secs >= limit {
                result.pass = false;
                result.detail.push_str(&format!(" [over {limit} s budget]"));
            }
        }
        let tag = if result.pass { "PASS" } else { "FAIL" };
        println!("[{tag}] {}. {name}: {} ({secs:.1} s)", k + 1, result.detail);
        failed += usize::from(!result.pass);
    }
    println!("acceptance: {} of 9 criteria passed", 9 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
