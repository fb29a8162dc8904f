//! Latency model that turns a UAV-sensing scenario into bidder valuations.
//!
//! A VSP waits for its slowest UAV (sensing plus upload), then processes every
//! received bit locally. Whatever latency exceeds its tightest application
//! requirement is what a computing unit is worth to it, normalized into [0, 1].

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{derive_seed, rng_from};

/// Raw image size from the reference semantic-extraction sample (3.59 MB).
pub const REFERENCE_RAW_IMAGE_BITS: f64 = 3.59e6 * 8.0;
/// Bits of semantic boxes extracted from the reference image (0.65 MB).
pub const REFERENCE_BOX_BITS: f64 = 0.65e6 * 8.0;
/// Bits of semantic text extracted from the reference image (56 B).
pub const REFERENCE_TEXT_BITS: f64 = 56.0 * 8.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UavConfig {
    pub sensing_time_s: f64,
    pub sensing_rate_img_per_s: f64,
    pub raw_image_bits: f64,
    /// Effective uplink rate to the VSP; stands in for bandwidth, distance and fading.
    pub link_rate_bps: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VspConfig {
    pub uavs: Vec<UavConfig>,
    pub cpu_hz: f64,
    pub cycles_per_bit: f64,
    pub app_latency_reqs_s: Vec<f64>,
}

/// Ranges redrawn for every VSP of every sampled profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingRanges {
    pub cpu_hz: [f64; 2],
    pub app_req_s: [f64; 2],
    /// When set, cycles per bit is drawn uniformly too; otherwise the VSP value is kept.
    #[serde(default)]
    pub cycles_per_bit: Option<[f64; 2]>,
}

impl Default for SamplingRanges {
    fn default() -> Self {
        Self {
            cpu_hz: [5e9, 10e9],
            app_req_s: [1.0, 3.0],
            cycles_per_bit: None,
        }
    }
}

/// Where valuations come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ValuationSource {
    /// The latency model.
    #[default]
    Latency,
    /// i.i.d. uniform [0, 1] values, bypassing the latency model.
    Uniform { n_bidders: usize },
}

/// Fields missing from a JSON document take their case-study values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MarketConfig {
    pub vsps: Vec<VspConfig>,
    pub n_units: usize,
    pub semcom_enabled: bool,
    pub semcom_box_ratio: f64,
    pub semcom_text_bits: f64,
    pub valuation_scale_s: f64,
    pub seed: u64,
    pub sampling: SamplingRanges,
    pub source: ValuationSource,
}

impl Default for MarketConfig {
    fn default() -> Self {
        Self::case_study()
    }
}

impl MarketConfig {
    /// The edge-computing case study: five VSPs with two UAVs each, 2 s of
    /// sensing at 3 images/s, 600 cycles/bit, three applications per VSP,
    /// CPU drawn in [5, 10] GHz and requirements in [1, 3] s, three units.
    pub fn case_study() -> Self {
        let uav = UavConfig {
            sensing_time_s: 2.0,
            sensing_rate_img_per_s: 3.0,
            raw_image_bits: REFERENCE_RAW_IMAGE_BITS,
            link_rate_bps: 50e6,
        };
        let vsp = VspConfig {
            uavs: vec![uav; 2],
            cpu_hz: 7.5e9,
            cycles_per_bit: 600.0,
            app_latency_reqs_s: vec![2.0; 3],
        };
        Self {
            vsps: vec![vsp; 5],
            n_units: 3,
            semcom_enabled: true,
            semcom_box_ratio: REFERENCE_BOX_BITS / REFERENCE_RAW_IMAGE_BITS,
            semcom_text_bits: REFERENCE_TEXT_BITS,
            valuation_scale_s: 10.0,
            seed: 1,
            sampling: SamplingRanges::default(),
            source: ValuationSource::Latency,
        }
    }

    /// Synthetic market with `n_bidders` uniform [0, 1] valuations.
    pub fn uniform(n_bidders: usize, n_units: usize) -> Self {
        Self {
            n_units,
            source: ValuationSource::Uniform { n_bidders },
            ..Self::case_study()
        }
    }

    pub fn n_bidders(&self) -> usize {
        match self.source {
            ValuationSource::Latency => self.vsps.len(),
            ValuationSource::Uniform { n_bidders } => n_bidders,
        }
    }

    /// Resizes the VSP list by repeating the first VSP.
    pub fn with_n_vsps(mut self, n: usize) -> Self {
        match &mut self.source {
            ValuationSource::Latency => {
                let template = self.vsps[0].clone();
                self.vsps.resize(n, template);
            }
            ValuationSource::Uniform { n_bidders } => *n_bidders = n,
        }
        self
    }

    pub fn with_n_apps(mut self, n: usize) -> Self {
        for vsp in &mut self.vsps {
            let fill = vsp.app_latency_reqs_s.first().copied().unwrap_or(2.0);
            vsp.app_latency_reqs_s.resize(n, fill);
        }
        self
    }

    pub fn with_semcom(mut self, enabled: bool) -> Self {
        self.semcom_enabled = enabled;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.n_bidders() < 2 {
            return bad(format!("need at least 2 bidders, got {}", self.n_bidders()));
        }
        if self.n_units < 1 {
            return bad("n_units must be >= 1".into());
        }
        if !(self.semcom_box_ratio > 0.0 && self.semcom_box_ratio <= 1.0) {
            return bad(format!(
                "semcom_box_ratio must lie in (0, 1], got {}",
                self.semcom_box_ratio
            ));
        }
        if !(self.semcom_text_bits >= 0.0 && self.semcom_text_bits.is_finite()) {
            return bad("semcom_text_bits must be finite and >= 0".into());
        }
        if !(self.valuation_scale_s > 0.0 && self.valuation_scale_s.is_finite()) {
            return bad("valuation_scale_s must be > 0".into());
        }
        check_range("sampling.cpu_hz", self.sampling.cpu_hz)?;
        check_range("sampling.app_req_s", self.sampling.app_req_s)?;
        if let Some(r) = self.sampling.cycles_per_bit {
            check_range("sampling.cycles_per_bit", r)?;
        }
        if matches!(self.source, ValuationSource::Latency) {
            for (i, vsp) in self.vsps.iter().enumerate() {
                vsp.validate()
                    .map_err(|e| Error::Config(format!("vsps[{i}]: {e}")))?;
            }
        }
        Ok(())
    }
}

fn check_range(name: &str, [lo, hi]: [f64; 2]) -> Result<()> {
    if lo > 0.0 && hi >= lo && hi.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "{name} must satisfy 0 < lo <= hi, got [{lo}, {hi}]"
        )))
    }
}

impl UavConfig {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("sensing_time_s", self.sensing_time_s),
            ("sensing_rate_img_per_s", self.sensing_rate_img_per_s),
            ("raw_image_bits", self.raw_image_bits),
            ("link_rate_bps", self.link_rate_bps),
        ];
        for (name, v) in fields {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("uav {name} must be > 0, got {v}")));
            }
        }
        Ok(())
    }
}

impl VspConfig {
    pub fn validate(&self) -> Result<()> {
        if self.uavs.is_empty() {
            return Err(Error::Config("a VSP needs at least one UAV".into()));
        }
        if self.app_latency_reqs_s.is_empty() {
            return Err(Error::Config("a VSP needs at least one application".into()));
        }
        if !(self.cpu_hz > 0.0) {
            return Err(Error::Config(format!(
                "cpu_hz must be > 0, got {}",
                self.cpu_hz
            )));
        }
        if !(self.cycles_per_bit > 0.0) {
            return Err(Error::Config(format!(
                "cycles_per_bit must be > 0, got {}",
                self.cycles_per_bit
            )));
        }
        if self.app_latency_reqs_s.iter().any(|&r| !(r > 0.0)) {
            return Err(Error::Config("latency requirements must be > 0".into()));
        }
        for (m, uav) in self.uavs.iter().enumerate() {
            uav.validate()
                .map_err(|e| Error::Config(format!("uavs[{m}]: {e}")))?;
        }
        Ok(())
    }

    /// Tightest application requirement.
    pub fn required_latency_s(&self) -> f64 {
        self.app_latency_reqs_s
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatencyBreakdown {
    pub sense_comm_s: f64,
    pub compute_s: f64,
    pub total_s: f64,
    pub total_bits: f64,
}

/// One auction instance: a valuation per bidder, each in [0, 1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValuationProfile {
    pub values: Vec<f64>,
}

impl ValuationProfile {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(v) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::Domain(format!("valuation {v} outside [0, 1]")));
        }
        Ok(Self { values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Bits of one transmitted image after optional semantic extraction.
pub fn semantic_payload_bits(raw_bits: f64, config: &MarketConfig) -> f64 {
    if config.semcom_enabled {
        raw_bits * config.semcom_box_ratio + config.semcom_text_bits
    } else {
        raw_bits
    }
}

/// Bits one UAV uploads per sensing round.
pub fn uav_payload_bits(uav: &UavConfig, config: &MarketConfig) -> Result<f64> {
    let images = (uav.sensing_time_s * uav.sensing_rate_img_per_s).floor();
    if !(images >= 1.0) {
        return Err(Error::Config(format!(
            "UAV captures no image: {} s at {} images/s",
            uav.sensing_time_s, uav.sensing_rate_img_per_s
        )));
    }
    Ok(images * semantic_payload_bits(uav.raw_image_bits, config))
}

/// Time until the slowest UAV has finished sensing and uploading.
pub fn sense_comm_time(vsp: &VspConfig, config: &MarketConfig) -> Result<f64> {
    let mut slowest: f64 = 0.0;
    for uav in &vsp.uavs {
        let t = uav.sensing_time_s + uav_payload_bits(uav, config)? / uav.link_rate_bps;
        slowest = slowest.max(t);
    }
    Ok(slowest)
}

pub fn local_compute_time(total_bits: f64, cpu_hz: f64, cycles_per_bit: f64) -> Result<f64> {
    if !(cpu_hz > 0.0) {
        return Err(Error::Config(format!("cpu_hz must be > 0, got {cpu_hz}")));
    }
    if !(cycles_per_bit > 0.0) {
        return Err(Error::Config(format!(
            "cycles_per_bit must be > 0, got {cycles_per_bit}"
        )));
    }
    Ok(total_bits * cycles_per_bit / cpu_hz)
}

pub fn total_latency(vsp: &VspConfig, config: &MarketConfig) -> Result<LatencyBreakdown> {
    let sense_comm_s = sense_comm_time(vsp, config)?;
    let mut total_bits = 0.0;
    for uav in &vsp.uavs {
        total_bits += uav_payload_bits(uav, config)?;
    }
    let compute_s = local_compute_time(total_bits, vsp.cpu_hz, vsp.cycles_per_bit)?;
    Ok(LatencyBreakdown {
        sense_comm_s,
        compute_s,
        total_s: sense_comm_s + compute_s,
        total_bits,
    })
}

/// Normalized latency deficit `clamp((t_total - t_req) / scale, 0, 1)`.
pub fn valuation_from_times(t_total_s: f64, t_req_s: f64, scale_s: f64) -> f64 {
    let v = (t_total_s - t_req_s) / scale_s;
    if v.is_nan() {
        0.0
    } else {
        v.clamp(0.0, 1.0)
    }
}

pub fn valuation(vsp: &VspConfig, config: &MarketConfig) -> Result<f64> {
    let latency = total_latency(vsp, config)?;
    Ok(valuation_from_times(
        latency.total_s,
        vsp.required_latency_s(),
        config.valuation_scale_s,
    ))
}

/// Per-VSP detail behind one sampled valuation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VspDraw {
    pub valuation: f64,
    pub t_total_s: f64,
    pub t_req_s: f64,
}

/// Sampled profiles plus the latency detail that produced them. `draws` is
/// empty for the synthetic uniform source.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub profiles: Vec<ValuationProfile>,
    pub draws: Vec<Vec<VspDraw>>,
}

pub fn sample_profiles(
    config: &MarketConfig,
    count: usize,
    seed: u64,
) -> Result<Vec<ValuationProfile>> {
    Ok(sample_dataset(config, count, seed)?.profiles)
}

/// Draws `count` profiles. Profile `i` uses its own generator seeded from
/// `(seed, i)`, so any index range can be produced independently.
pub fn sample_dataset(config: &MarketConfig, count: usize, seed: u64) -> Result<Dataset> {
    if count == 0 {
        return Err(Error::Config("profile count must be >= 1".into()));
    }
    config.validate()?;
    let mut profiles = Vec::with_capacity(count);
    let mut draws = Vec::new();
    for i in 0..count {
        let mut rng = rng_from(derive_seed(seed, i as u64));
        match config.source {
            ValuationSource::Uniform { n_bidders } => {
                let values = (0..n_bidders).map(|_| rng.gen::<f64>()).collect();
                profiles.push(ValuationProfile { values });
            }
            ValuationSource::Latency => {
                let row = sample_row(config, &mut rng)?;
                profiles.push(ValuationProfile {
                    values: row.iter().map(|d| d.valuation).collect(),
                });
                draws.push(row);
            }
        }
    }
    Ok(Dataset { profiles, draws })
}

pub(crate) fn sample_row(config: &MarketConfig, rng: &mut impl Rng) -> Result<Vec<VspDraw>> {
    let s = &config.sampling;
    config
        .vsps
        .iter()
        .map(|template| {
            let mut vsp = template.clone();
            vsp.cpu_hz = uniform(rng, s.cpu_hz);
            for req in &mut vsp.app_latency_reqs_s {
                *req = uniform(rng, s.app_req_s);
            }
            if let Some(range) = s.cycles_per_bit {
                vsp.cycles_per_bit = uniform(rng, range);
            }
            let latency = total_latency(&vsp, config)?;
            let t_req_s = vsp.required_latency_s();
            Ok(VspDraw {
                valuation: valuation_from_times(latency.total_s, t_req_s, config.valuation_scale_s),
                t_total_s: latency.total_s,
                t_req_s,
            })
        })
        .collect()
}

fn uniform(rng: &mut impl Rng, [lo, hi]: [f64; 2]) -> f64 {
    lo + (hi - lo) * rng.gen::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn uav(sense: f64, rate: f64, raw: f64, link: f64) -> UavConfig {
        UavConfig {
            sensing_time_s: sense,
            sensing_rate_img_per_s: rate,
            raw_image_bits: raw,
            link_rate_bps: link,
        }
    }

    fn raw_config() -> MarketConfig {
        MarketConfig::case_study().with_semcom(false)
    }

    #[test]
    fn reference_image_payload() {
        let cfg = MarketConfig::case_study();
        assert_eq!(REFERENCE_RAW_IMAGE_BITS, 28_720_000.0);
        assert_eq!(semantic_payload_bits(28_720_000.0, &cfg), 5_200_448.0);
    }

    #[test]
    fn payload_identities() {
        assert_eq!(semantic_payload_bits(1234.5, &raw_config()), 1234.5);
        let cfg = MarketConfig {
            semcom_box_ratio: 1.0,
            semcom_text_bits: 0.0,
            ..MarketConfig::case_study()
        };
        assert_eq!(semantic_payload_bits(1234.5, &cfg), 1234.5);
    }

    #[test]
    fn uav_payload() {
        let raw = raw_config();
        assert_eq!(
            uav_payload_bits(&uav(2.0, 3.0, 1e6, 1e6), &raw).unwrap(),
            6e6
        );
        assert_eq!(
            uav_payload_bits(&uav(1.0, 1.0, 8.0, 1e6), &raw).unwrap(),
            8.0
        );
        let cfg = MarketConfig {
            semcom_box_ratio: 0.2,
            semcom_text_bits: 448.0,
            ..MarketConfig::case_study()
        };
        assert_eq!(
            uav_payload_bits(&uav(2.0, 3.0, 1e6, 1e6), &cfg).unwrap(),
            1_202_688.0
        );
    }

    #[test]
    fn zero_images_rejected() {
        let err = uav_payload_bits(&uav(0.5, 1.0, 8.0, 1.0), &raw_config()).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    fn vsp_with(uavs: Vec<UavConfig>) -> VspConfig {
        VspConfig {
            uavs,
            cpu_hz: 6e9,
            cycles_per_bit: 600.0,
            app_latency_reqs_s: vec![3.0],
        }
    }

    #[test]
    fn slowest_uav_dominates() {
        let raw = raw_config();
        // (2 s, 4e6 bits, 2e6 bps) and (2 s, 2e6 bits, 2e6 bps)
        let vsp = vsp_with(vec![uav(2.0, 0.5, 4e6, 2e6), uav(2.0, 0.5, 2e6, 2e6)]);
        assert_eq!(sense_comm_time(&vsp, &raw).unwrap(), 4.0);
        let single = vsp_with(vec![uav(2.0, 0.5, 2e6, 2e6)]);
        assert_eq!(sense_comm_time(&single, &raw).unwrap(), 3.0);
        let twins = vsp_with(vec![uav(2.0, 0.5, 2e6, 2e6); 3]);
        assert_eq!(sense_comm_time(&twins, &raw).unwrap(), 3.0);
    }

    #[test]
    fn compute_time() {
        assert!((local_compute_time(6e6, 6e9, 600.0).unwrap() - 0.6).abs() < 1e-12);
        assert_eq!(local_compute_time(1.0, 1.0, 1.0).unwrap(), 1.0);
        let a = local_compute_time(5e6, 5e9, 600.0).unwrap();
        let b = local_compute_time(5e6, 10e9, 600.0).unwrap();
        assert!((a - 2.0 * b).abs() < 1e-12);
        assert!(matches!(
            local_compute_time(1.0, 0.0, 1.0),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn composed_latency() {
        let vsp = vsp_with(vec![uav(2.0, 0.5, 4e6, 2e6), uav(2.0, 0.5, 2e6, 2e6)]);
        let lat = total_latency(&vsp, &raw_config()).unwrap();
        assert_eq!(lat.total_bits, 6e6);
        assert!((lat.total_s - 4.6).abs() < 1e-12);
        assert_eq!(lat.total_s, lat.sense_comm_s + lat.compute_s);
        let v = valuation_from_times(lat.total_s, 3.0, 5.0);
        assert!((v - 0.32).abs() < 1e-12);
    }

    #[test]
    fn negligible_compute_limit() {
        let mut vsp = vsp_with(vec![uav(2.0, 1.0, 10.0, 1e9)]);
        vsp.cpu_hz = 1e15;
        let lat = total_latency(&vsp, &raw_config()).unwrap();
        assert!((lat.total_s - lat.sense_comm_s).abs() < 1e-9);
    }

    #[test]
    fn valuation_boundaries() {
        assert_eq!(valuation_from_times(2.0, 3.0, 5.0), 0.0);
        assert_eq!(valuation_from_times(3.0, 3.0, 5.0), 0.0);
        assert_eq!(valuation_from_times(100.0, 1.0, 5.0), 1.0);
    }

    #[test]
    fn semcom_never_slower() {
        let on = MarketConfig::case_study();
        let off = raw_config();
        let vsp = &on.vsps[0];
        assert!(
            total_latency(vsp, &on).unwrap().total_s <= total_latency(vsp, &off).unwrap().total_s
        );
    }

    #[test]
    fn sampling_is_deterministic_and_clamped() {
        let cfg = MarketConfig::case_study();
        let a = sample_dataset(&cfg, 200, 9).unwrap();
        let b = sample_dataset(&cfg, 200, 9).unwrap();
        assert_eq!(a, b);
        assert!(a
            .profiles
            .iter()
            .flat_map(|p| &p.values)
            .all(|v| (0.0..=1.0).contains(v)));
        assert_eq!(a.profiles[0].len(), 5);
        assert!(sample_dataset(&cfg, 0, 9).is_err());
    }

    #[test]
    fn prefix_stable_sampling() {
        let cfg = MarketConfig::case_study();
        let long = sample_profiles(&cfg, 50, 3).unwrap();
        let short = sample_profiles(&cfg, 20, 3).unwrap();
        assert_eq!(&long[..20], &short[..]);
    }

    #[test]
    fn paired_semcom_dominance() {
        let on = sample_dataset(&MarketConfig::case_study(), 500, 4).unwrap();
        let off = sample_dataset(&raw_config(), 500, 4).unwrap();
        for (a, b) in on.draws.iter().flatten().zip(off.draws.iter().flatten()) {
            assert!(a.valuation <= b.valuation);
            assert_eq!(a.t_req_s, b.t_req_s);
            assert!(a.t_total_s < b.t_total_s);
        }
    }

    #[test]
    fn uniform_source() {
        let cfg = MarketConfig::uniform(2, 1);
        let ps = sample_profiles(&cfg, 100, 1).unwrap();
        assert!(ps.iter().all(|p| p.len() == 2));
        let d = sample_dataset(&cfg, 10, 1).unwrap();
        assert!(d.draws.is_empty());
    }

    #[test]
    fn config_validation() {
        assert!(MarketConfig::case_study().validate().is_ok());
        let mut c = MarketConfig::case_study();
        c.vsps.truncate(1);
        assert!(c.validate().is_err());
        let mut c = MarketConfig::case_study();
        c.semcom_box_ratio = 0.0;
        assert!(c.validate().is_err());
        let mut c = MarketConfig::case_study();
        c.vsps[2].uavs.clear();
        assert!(c.validate().is_err());
        let mut c = MarketConfig::case_study();
        c.n_units = 0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn json_round_trip() {
        let cfg = MarketConfig::case_study();
        let text = serde_json::to_string_pretty(&cfg).unwrap();
        let back: MarketConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back, cfg);
    }

    fn brute_max(vsp: &VspConfig, cfg: &MarketConfig) -> f64 {
        let mut best = f64::NEG_INFINITY;
        for u in &vsp.uavs {
            let t = u.sensing_time_s + uav_payload_bits(u, cfg).unwrap() / u.link_rate_bps;
            if t > best {
                best = t;
            }
        }
        best
    }

    proptest! {
        #[test]
        fn sense_comm_is_max_over_uavs(
            uavs in prop::collection::vec((1.0f64..4.0, 1.0f64..5.0, 1e3f64..1e7, 1e5f64..1e8), 1..6)
        ) {
            let vsp = vsp_with(uavs.into_iter().map(|(s, r, b, l)| uav(s, r, b, l)).collect());
            let cfg = MarketConfig::case_study();
            prop_assert_eq!(sense_comm_time(&vsp, &cfg).unwrap(), brute_max(&vsp, &cfg));
        }

        #[test]
        fn valuation_monotone(
            raw in 1e5f64..3e7, link in 1e6f64..1e8, cpu in 5e9f64..1e10,
            zeta in 100.0f64..1000.0, req in 1.0f64..3.0, factor in 1.0f64..3.0,
        ) {
            let cfg = MarketConfig::case_study();
            let base = VspConfig {
                uavs: vec![uav(2.0, 3.0, raw, link); 2],
                cpu_hz: cpu,
                cycles_per_bit: zeta,
                app_latency_reqs_s: vec![req],
            };
            let v0 = valuation(&base, &cfg).unwrap();
            let mut more_bits = base.clone();
            more_bits.uavs[0].raw_image_bits *= factor;
            prop_assert!(valuation(&more_bits, &cfg).unwrap() >= v0);
            let mut more_zeta = base.clone();
            more_zeta.cycles_per_bit *= factor;
            prop_assert!(valuation(&more_zeta, &cfg).unwrap() >= v0);
            let mut slower_cpu = base.clone();
            slower_cpu.cpu_hz /= factor;
            prop_assert!(valuation(&slower_cpu, &cfg).unwrap() >= v0);
            let mut slower_link = base.clone();
            slower_link.uavs[1].link_rate_bps /= factor;
            prop_assert!(valuation(&slower_link, &cfg).unwrap() >= v0);
            prop_assert!((0.0..=1.0).contains(&v0));
        }

        #[test]
        fn semcom_dominance_any_ratio(ratio in 0.01f64..0.999, seed in any::<u64>()) {
            let on = MarketConfig { semcom_box_ratio: ratio, ..MarketConfig::case_study() };
            let off = on.clone().with_semcom(false);
            let a = sample_profiles(&on, 8, seed).unwrap();
            let b = sample_profiles(&off, 8, seed).unwrap();
            for (pa, pb) in a.iter().zip(&b) {
                for (x, y) in pa.values.iter().zip(&pb.values) {
                    prop_assert!(x <= y);
                }
            }
        }
    }
}
