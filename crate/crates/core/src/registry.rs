//! Named filters with their default parameters.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::color_math::{AcosMode, DistanceKind, FuzzyMetric};
use crate::error::{Error, Result};
use crate::filters::basic::{self, BasicParams};
use crate::filters::fuzzy::{fovf, fwaf, FuzzyWeightKind};
use crate::filters::hybrid::{self, KernelParams, RationalFlavor, RationalParams};
use crate::filters::misc::{self, AmnfKernel, MiscParams};
use crate::filters::switching::{self, SigmaParams, SigmaReference, FPGF_DEFAULT_M};
use crate::filters::weighted::{self, CenterWeightParams};
use crate::image::{filter_image, Image, Window, WindowFilter};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    Basic,
    Fuzzy,
    Hybrid,
    Weighted,
    Entropy,
    PeerGroup,
    Sigma,
    Misc,
}

impl Family {
    pub fn tag(self) -> &'static str {
        match self {
            Family::Basic => "basic",
            Family::Fuzzy => "fuzzy",
            Family::Hybrid => "hybrid",
            Family::Weighted => "weighted",
            Family::Entropy => "entropy",
            Family::PeerGroup => "peer-group",
            Family::Sigma => "sigma",
            Family::Misc => "misc",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FilterInfo {
    pub name: &'static str,
    pub family: Family,
    pub switching: bool,
}

const fn info(name: &'static str, family: Family, switching: bool) -> FilterInfo {
    FilterInfo {
        name,
        family,
        switching,
    }
}

use Family::*;

/// The 48 filters of the study, in table order.
pub const FILTERS: [FilterInfo; 48] = [
    info("vmf", Basic, false),
    info("atvmf", Basic, false),
    info("bvdf", Basic, false),
    info("gvdf", Basic, false),
    info("ddf", Basic, false),
    info("cbrf", Basic, false),
    info("fvmf", Fuzzy, false),
    info("fvdf", Fuzzy, false),
    info("annf", Fuzzy, false),
    info("annmf", Fuzzy, false),
    info("fovmf", Fuzzy, false),
    info("fovdf", Fuzzy, false),
    info("exvmf", Hybrid, false),
    info("hdf", Hybrid, false),
    info("ahdf", Hybrid, false),
    info("vmrhf", Hybrid, false),
    info("fvmrhf", Hybrid, false),
    info("fvdrhf", Hybrid, false),
    info("fddrhf", Hybrid, false),
    info("kvmf", Hybrid, false),
    info("mcwvmf", Weighted, true),
    info("acwvmf", Weighted, true),
    info("acwvdf", Weighted, true),
    info("acwddf", Weighted, true),
    info("evmf", Entropy, true),
    info("ebvdf", Entropy, true),
    info("eddf", Entropy, true),
    info("pgf", PeerGroup, true),
    info("fpgf", PeerGroup, true),
    info("svmf_mean", Sigma, true),
    info("svmf_rank", Sigma, true),
    info("sbvdf_mean", Sigma, true),
    info("sbvdf_rank", Sigma, true),
    info("sddf_mean", Sigma, true),
    info("sddf_rank", Sigma, true),
    info("asvmf_mean", Sigma, true),
    info("asvmf_rank", Sigma, true),
    info("asbvdf_mean", Sigma, true),
    info("asbvdf_rank", Sigma, true),
    info("asddf_mean", Sigma, true),
    info("asddf_rank", Sigma, true),
    info("vsdromf", Misc, true),
    info("amnfe", Misc, false),
    info("amnfg", Misc, false),
    info("fmvmf", Misc, true),
    info("avmf", Misc, true),
    info("abvdf", Misc, true),
    info("ffnrf", Misc, true),
];

/// Identity pseudo-filter, used as the unfiltered baseline in benchmarks.
pub const IDENTITY: &str = "none";

/// Center-weighted utilities, selectable by name but not part of [`FILTERS`].
pub const EXTRA_FILTERS: [&str; 4] = [IDENTITY, "cwvmf", "cwvdf", "cwddf"];

pub fn lookup(name: &str) -> Option<&'static FilterInfo> {
    FILTERS.iter().find(|f| f.name == name)
}

pub fn is_known(name: &str) -> bool {
    lookup(name).is_some() || EXTRA_FILTERS.contains(&name)
}

pub fn names() -> impl Iterator<Item = &'static str> {
    FILTERS.iter().map(|f| f.name)
}

/// A filter name plus everything needed to instantiate it.
#[derive(Clone, Debug, PartialEq)]
pub struct FilterSpec {
    pub name: String,
    pub params: BTreeMap<String, f64>,
    pub p: f64,
    pub acos: AcosMode,
}

impl FilterSpec {
    pub fn new(name: impl Into<String>) -> Self {
        FilterSpec {
            name: name.into(),
            params: BTreeMap::new(),
            p: 2.0,
            acos: AcosMode::Approximate,
        }
    }

    pub fn with_p(mut self, p: f64) -> Self {
        self.p = p;
        self
    }

    pub fn with_acos(mut self, acos: AcosMode) -> Self {
        self.acos = acos;
        self
    }

    pub fn with_param(mut self, key: impl Into<String>, value: f64) -> Self {
        self.params.insert(key.into(), value);
        self
    }

    /// Parses a `key=value` override.
    pub fn set_param_str(&mut self, kv: &str) -> Result<()> {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Error::param(&self.name, format!("expected key=value, got `{kv}`")))?;
        let value: f64 = v
            .trim()
            .parse()
            .map_err(|_| Error::param(&self.name, format!("`{}` is not a number", v.trim())))?;
        self.params.insert(k.trim().to_string(), value);
        Ok(())
    }
}

/// Consumes named parameters, remembering which ones were used.
struct Params<'a> {
    filter: &'a str,
    given: BTreeMap<String, f64>,
}

impl<'a> Params<'a> {
    fn get(&mut self, key: &str, default: f64) -> f64 {
        self.given.remove(key).unwrap_or(default)
    }

    fn opt(&mut self, key: &str) -> Option<f64> {
        self.given.remove(key)
    }

    fn positive(&mut self, key: &str, default: f64) -> Result<f64> {
        let v = self.get(key, default);
        if v > 0.0 && v.is_finite() {
            Ok(v)
        } else {
            Err(Error::param(self.filter, format!("{key} must be positive, got {v}")))
        }
    }

    fn unit(&mut self, key: &str, default: f64) -> Result<f64> {
        let v = self.get(key, default);
        if (0.0..=1.0).contains(&v) {
            Ok(v)
        } else {
            Err(Error::param(self.filter, format!("{key} must lie in [0, 1], got {v}")))
        }
    }

    fn count(&mut self, key: &str, default: usize, lo: usize, hi: usize) -> Result<usize> {
        let v = self.get(key, default as f64);
        if v.fract() != 0.0 || v < lo as f64 || v > hi as f64 {
            return Err(Error::param(
                self.filter,
                format!("{key} must be an integer in [{lo}, {hi}], got {v}"),
            ));
        }
        Ok(v as usize)
    }

    fn finish(self) -> Result<()> {
        match self.given.keys().next() {
            Some(k) => Err(Error::param(self.filter, format!("unknown parameter `{k}`"))),
            None => Ok(()),
        }
    }
}

type Boxed = Box<dyn WindowFilter>;

fn boxed(f: impl Fn(&Window) -> crate::color_math::Vec3 + Send + Sync + 'static) -> Boxed {
    Box::new(f)
}

/// Instantiates `spec` for windows of side `side`. `img` is the image that
/// will be filtered; only KVMF reads it, to estimate its kernel width.
pub fn build(spec: &FilterSpec, img: &Image, side: usize) -> Result<Boxed> {
    let name = spec.name.as_str();
    if !is_known(name) {
        return Err(Error::UnknownFilter(spec.name.clone()));
    }
    if side < 3 || side.is_multiple_of(2) {
        return Err(Error::WindowSize(side));
    }
    if spec.p.is_nan() || spec.p < 1.0 {
        return Err(Error::param(name, format!("p must be >= 1, got {}", spec.p)));
    }
    let n = side * side;
    let p = spec.p;
    let mode = spec.acos;
    let mut prm = Params {
        filter: name,
        given: spec.params.clone(),
    };
    let defaults = BasicParams::for_window(n);
    let cw = CenterWeightParams::default();
    let misc_d = MiscParams::default();
    let dd = |gamma| DistanceKind::Directional { gamma, p };
    let l = DistanceKind::Minkowski { p };

    let f: Boxed = match name {
        "none" => boxed(|w| w.center()),
        "vmf" => boxed(move |w| basic::vmf(w, p)),
        "atvmf" => {
            let alpha = prm.count("alpha", defaults.alpha_trim, 0, n - 1)?;
            boxed(move |w| basic::atvmf(w, alpha, p))
        }
        "bvdf" => boxed(move |w| basic::bvdf(w, mode)),
        "gvdf" => {
            let k = prm.count("k", defaults.k_gvdf, 1, n)?;
            boxed(move |w| basic::gvdf(w, k, mode))
        }
        "ddf" => {
            let g = prm.unit("gamma", defaults.gamma_ddf)?;
            boxed(move |w| basic::ddf(w, g, p, mode))
        }
        "cbrf" => boxed(basic::cbrf),

        "fvmf" | "fovmf" => {
            let kind = FuzzyWeightKind::Exponential {
                gamma: prm.positive("gamma", 0.5)?,
                beta: prm.positive("beta", 1.0)?,
                p,
            };
            fuzzy_filter(name == "fovmf", kind, mode)
        }
        "fvdf" | "fovdf" => {
            let kind = FuzzyWeightKind::Sigmoidal {
                gamma: prm.positive("gamma", 1.0)?,
                beta: prm.positive("beta", 2.0)?,
            };
            fuzzy_filter(name == "fovdf", kind, mode)
        }
        "annf" => fuzzy_filter(false, FuzzyWeightKind::NearestNeighbor(DistanceKind::Angular), mode),
        "annmf" => fuzzy_filter(false, FuzzyWeightKind::CompositeNearestNeighbor, mode),

        "exvmf" => boxed(move |w| hybrid::exvmf(w, p)),
        "hdf" => boxed(move |w| hybrid::hdf(w, p, mode)),
        "ahdf" => boxed(move |w| hybrid::ahdf(w, p, mode)),
        "vmrhf" | "fvmrhf" | "fvdrhf" | "fddrhf" => {
            let flavor = match name {
                "vmrhf" => RationalFlavor::Vmrhf,
                "fvmrhf" => RationalFlavor::Fvmrhf,
                "fvdrhf" => RationalFlavor::Fvdrhf,
                _ => RationalFlavor::Fddrhf,
            };
            let d = RationalParams::default();
            let alpha = [
                prm.get("alpha1", d.alpha[0]),
                prm.get("alpha2", d.alpha[1]),
                prm.get("alpha3", d.alpha[2]),
            ];
            if alpha.iter().sum::<f64>().abs() > 1e-12 {
                return Err(Error::param(name, "alpha1 + alpha2 + alpha3 must be 0"));
            }
            let params = RationalParams {
                alpha,
                beta1: prm.positive("beta1", d.beta1)?,
                beta2: prm.positive("beta2", d.beta2)?,
                gamma_fuzzy: prm.positive("gamma", d.gamma_fuzzy)?,
                gamma_dd: prm.unit("gamma_dd", d.gamma_dd)?,
                p,
            };
            boxed(move |w| hybrid::rational_hybrid(w, flavor, &params, mode))
        }
        "kvmf" => {
            let beta = prm.positive("beta", 0.5)?;
            let h = match prm.opt("h") {
                Some(h) if h > 0.0 => h,
                Some(h) => return Err(Error::param(name, format!("h must be positive, got {h}"))),
                None => hybrid::estimate_kernel_width(img, beta),
            };
            let params = KernelParams { beta, h };
            boxed(move |w| hybrid::kvmf(w, params, p))
        }

        "cwvmf" | "cwvdf" | "cwddf" => {
            let kind = match name {
                "cwvmf" => l,
                "cwvdf" => DistanceKind::Angular,
                _ => dd(prm.unit("gamma", cw.gamma_dd)?),
            };
            let k = prm.count("k", n.div_ceil(2), 1, n.div_ceil(2))?;
            boxed(move |w| weighted::cwvf(w, k, kind, mode))
        }
        "mcwvmf" => {
            let wt = prm.get("w", cw.w_mcw);
            if wt.is_nan() || wt < 0.0 {
                return Err(Error::param(name, format!("w must be >= 0, got {wt}")));
            }
            boxed(move |w| weighted::mcwvmf(w, wt, p))
        }
        "acwvmf" | "acwvdf" | "acwddf" => {
            let (kind, t) = match name {
                "acwvmf" => (l, CenterWeightParams::ACWVMF_THRESHOLD),
                "acwvdf" => (DistanceKind::Angular, CenterWeightParams::ACWVDF_THRESHOLD),
                _ => (dd(prm.unit("gamma", cw.gamma_dd)?), CenterWeightParams::ACWDDF_THRESHOLD),
            };
            let t = prm.positive("t", t)?;
            let lambda = prm.count("lambda", cw.lambda, 1, n.div_ceil(2) - 2)?;
            boxed(move |w| weighted::acwvf(w, kind, lambda, t, mode))
        }

        "evmf" => boxed(move |w| switching::entropy_vf(w, l, mode)),
        "ebvdf" => boxed(move |w| switching::entropy_vf(w, DistanceKind::Angular, mode)),
        "eddf" => {
            let kind = dd(prm.unit("gamma", 0.5)?);
            boxed(move |w| switching::entropy_vf(w, kind, mode))
        }
        "pgf" => {
            let t = prm.positive("t", 45.0)?;
            let m = prm.count("m", switching::pgf_default_m(side), 1, n - 1)?;
            boxed(move |w| switching::pgf(w, t, m, p))
        }
        "fpgf" => {
            let t = prm.positive("t", 45.0)?;
            let m = prm.count("m", FPGF_DEFAULT_M, 1, n - 1)?;
            boxed(move |w| switching::fpgf(w, t, m, p))
        }
        s if s.starts_with("svmf_")
            || s.starts_with("sbvdf_")
            || s.starts_with("sddf_")
            || s.starts_with("asvmf_")
            || s.starts_with("asbvdf_")
            || s.starts_with("asddf_") =>
        {
            let (base, reference) = s.rsplit_once('_').expect("sigma names carry a suffix");
            let reference = if reference == "mean" {
                SigmaReference::Mean
            } else {
                SigmaReference::Rank
            };
            let adaptive = base.starts_with("as");
            let kind = match base.trim_start_matches('a') {
                "svmf" => l,
                "sbvdf" => DistanceKind::Angular,
                _ => dd(prm.unit("gamma", 0.5)?),
            };
            let mut params = SigmaParams::new(reference, adaptive);
            if !adaptive {
                params.lambda = prm.positive("lambda", params.lambda)?;
            }
            boxed(move |w| switching::sigma_vf(w, kind, params, mode))
        }

        "vsdromf" => {
            let d = misc_d.sdrom_t;
            let t = [
                prm.positive("t1", d[0])?,
                prm.positive("t2", d[1])?,
                prm.positive("t3", d[2])?,
                prm.positive("t4", d[3])?,
            ];
            if t.windows(2).any(|w| w[0] > w[1]) {
                return Err(Error::param(name, "thresholds must satisfy t1 <= t2 <= t3 <= t4"));
            }
            boxed(move |w| misc::vsdromf(w, t, p))
        }
        "amnfe" | "amnfg" => {
            let kernel = if name == "amnfe" {
                AmnfKernel::Exponential
            } else {
                AmnfKernel::Gaussian
            };
            let k = prm.positive("k", misc_d.amnf_k)?;
            let c = prm.count("c", misc_d.amnf_c as usize, 1, 16)? as i32;
            boxed(move |w| misc::amnf(w, kernel, k, c))
        }
        "fmvmf" => {
            let t = prm.get("t", misc_d.fmvmf_t);
            if t.is_nan() || t < 0.0 {
                return Err(Error::param(name, format!("t must be >= 0, got {t}")));
            }
            boxed(move |w| misc::fmvmf(w, t, p))
        }
        "avmf" | "abvdf" => {
            let (kind, t) = if name == "avmf" {
                (l, misc_d.avmf_t)
            } else {
                (DistanceKind::Angular, misc_d.abvdf_t)
            };
            let t = prm.positive("t", t)?;
            let k = prm.count("k", misc_d.avmf_k.unwrap_or(misc::avmf_default_k(n)), 1, n)?;
            boxed(move |w| misc::avf_adaptive(w, kind, t, k, mode))
        }
        "ffnrf" => {
            let k = prm.positive("k", misc_d.ffnrf_k)?;
            let alpha = prm.positive("alpha", misc_d.ffnrf_alpha)?;
            let metric = FuzzyMetric::with_table(k, alpha);
            boxed(move |w| misc::ffnrf(w, &metric))
        }
        _ => unreachable!("`{name}` is registered but has no constructor"),
    };
    prm.finish()?;
    Ok(f)
}

fn fuzzy_filter(ordered: bool, kind: FuzzyWeightKind, mode: AcosMode) -> Boxed {
    if ordered {
        boxed(move |w| fovf(w, kind, mode))
    } else {
        boxed(move |w| fwaf(w, kind, mode))
    }
}

/// Filters `img` with the named filter over `side`×`side` windows.
pub fn apply_filter(img: &Image, spec: &FilterSpec, side: usize) -> Result<Image> {
    let f = build(spec, img, side)?;
    filter_image(img, f.as_ref(), side)
}

impl FromStr for FilterSpec {
    type Err = Error;

    /// Accepts a bare registry name.
    fn from_str(s: &str) -> Result<Self> {
        if is_known(s) {
            Ok(FilterSpec::new(s))
        } else {
            Err(Error::UnknownFilter(s.to_string()))
        }
    }
}
