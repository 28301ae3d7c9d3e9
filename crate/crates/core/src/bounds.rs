//! Explicit generalization bounds and the constants feeding them.
//!
//! Formulas are evaluated verbatim. Logarithm arguments below `e` are not
//! clamped; they are reported through [`log_warnings`] and `log::warn!`.

use crate::error::{at_least, open_unit, positive, Error, Result};

/// `C` in the VC-class deviation inequality.
pub const C_VC: f64 = 12.0;

/// Universal constants used by the bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantTable {
    /// `12 ∫₁^∞ s⁻² √(1 + log s) ds`.
    pub c_subroot: f64,
    /// `108 · c_subroot²`.
    pub c1: f64,
    pub c_vc: f64,
    /// `5 · C_VC`.
    pub k1: f64,
    /// `64 · C_VC²`.
    pub k2: f64,
}

impl ConstantTable {
    pub fn compute() -> Self {
        let c_subroot = compute_subroot_constant();
        Self {
            c_subroot,
            c1: 108.0 * c_subroot * c_subroot,
            c_vc: C_VC,
            k1: 5.0 * C_VC,
            k2: 64.0 * C_VC * C_VC,
        }
    }
}

// Gauss–Kronrod 7/15 nodes and weights on [-1, 1].
const GK_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const KRONROD_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const GAUSS_WEIGHTS: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// One G7/K15 panel: `(kronrod estimate, |kronrod − gauss|)`.
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = KRONROD_WEIGHTS[7] * fc;
    let mut gauss = GAUSS_WEIGHTS[3] * fc;
    for i in 0..7 {
        let dx = half * GK_NODES[i];
        let sum = f(center - dx) + f(center + dx);
        kronrod += KRONROD_WEIGHTS[i] * sum;
        if i % 2 == 1 {
            gauss += GAUSS_WEIGHTS[i / 2] * sum;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

/// Adaptive Gauss–Kronrod quadrature on `[a, b]` to absolute tolerance `tol`.
pub fn integrate_adaptive<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    fn recurse<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
        let (value, err) = gk15(f, a, b);
        if err <= tol || depth == 0 {
            return value;
        }
        let mid = 0.5 * (a + b);
        recurse(f, a, mid, 0.5 * tol, depth - 1) + recurse(f, mid, b, 0.5 * tol, depth - 1)
    }
    recurse(&f, a, b, tol, 40)
}

/// `12 ∫₀^∞ e^{−t} √(1 + t) dt`, the substituted form of
/// `12 ∫₁^∞ s⁻² √(1 + log s) ds` (`s = eᵗ`). The half-line is mapped onto
/// `[0, 1)` with `t = x / (1 − x)`.
pub fn compute_subroot_constant() -> f64 {
    let integrand = |x: f64| {
        if x >= 1.0 {
            return 0.0;
        }
        let t = x / (1.0 - x);
        let jac = 1.0 / ((1.0 - x) * (1.0 - x));
        (-t).exp() * (1.0 + t).sqrt() * jac
    };
    12.0 * integrate_adaptive(integrand, 0.0, 1.0, 1e-13)
}

/// Inputs shared by the rate bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundInputs {
    pub n: f64,
    /// Class probability (or its estimate).
    pub p: f64,
    pub q: f64,
    pub v: f64,
    pub a: f64,
    /// Envelope `U`.
    pub envelope: f64,
    pub sigma_plus: f64,
    pub sigma_minus: f64,
    /// Bernstein constant `B`.
    pub bernstein: f64,
    pub delta: f64,
    /// The constant `K` of the bound being evaluated.
    pub k_const: f64,
}

impl Default for BoundInputs {
    fn default() -> Self {
        Self {
            n: 1e6,
            p: 0.01,
            q: 0.01,
            v: 1.0,
            a: 1.0,
            envelope: 1.0,
            sigma_plus: 1.0,
            sigma_minus: 1.0,
            bernstein: 2.0,
            delta: 0.05,
            k_const: DEFAULT_SLOW_RATE_K,
        }
    }
}

/// Default for the unspecified universal constant of the slow-rate bounds.
pub const DEFAULT_SLOW_RATE_K: f64 = 60.0;

impl BoundInputs {
    pub fn sigma_max(&self) -> f64 {
        self.sigma_plus.max(self.sigma_minus)
    }

    pub fn sigma_min(&self) -> f64 {
        self.sigma_plus.min(self.sigma_minus)
    }

    fn validate_common(&self) -> Result<()> {
        at_least("n", self.n, 1.0, ">= 1")?;
        open_unit("p", self.p)?;
        at_least("v", self.v, 1.0, ">= 1")?;
        at_least("A", self.a, 1.0, ">= 1")?;
        positive("U", self.envelope)?;
        open_unit("delta", self.delta)?;
        positive("K", self.k_const)?;
        for (name, s) in [("sigma_plus", self.sigma_plus), ("sigma_minus", self.sigma_minus)] {
            if !(s > 0.0 && s <= self.envelope) {
                return Err(Error::Domain {
                    name,
                    value: s,
                    expected: "(0, U]",
                });
            }
        }
        Ok(())
    }
}

/// A bound value plus whether its sample-size condition holds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckedBound {
    pub bound: f64,
    pub valid: bool,
}

fn warn_small_log(name: &str, arg: f64) {
    if arg < std::f64::consts::E {
        log::warn!("{name}: logarithm argument {arg} is below e");
    }
}

/// Logarithm arguments of the rate bounds that fall below `e`.
pub fn log_warnings(inputs: &BoundInputs) -> Vec<(&'static str, f64)> {
    let slow = inputs.k_const * inputs.a * inputs.envelope / (inputs.delta * inputs.sigma_plus * inputs.p.sqrt());
    let erm = inputs.k_const * inputs.a * inputs.envelope / (inputs.delta * inputs.sigma_min() * inputs.p.sqrt());
    [("slow_rate", slow), ("slow_rate_erm", erm)]
        .into_iter()
        .filter(|(_, a)| *a < std::f64::consts::E)
        .collect()
}

/// Uniform deviation of the positive-class empirical mean over a VC-type
/// class: `K σ₊ √((v / np) log(K A U / (δ σ₊ √p)))`. Valid when
/// `np ≥ max((U²/σ₊²) v log(K A U / (δ σ₊ √p)), 8 log(1/δ))`.
pub fn slow_rate_bound(inputs: &BoundInputs) -> Result<CheckedBound> {
    inputs.validate_common()?;
    let BoundInputs {
        n,
        p,
        v,
        a,
        envelope: u,
        sigma_plus: s,
        delta,
        k_const: k,
        ..
    } = *inputs;
    let arg = k * a * u / (delta * s * p.sqrt());
    warn_small_log("slow_rate_bound", arg);
    let log_term = arg.ln();
    let np = n * p;
    let bound = k * s * (v / np * log_term).sqrt();
    let needed = ((u * u) / (s * s) * v * log_term).max(8.0 * (1.0 / delta).ln());
    Ok(CheckedBound {
        bound,
        valid: np >= needed && log_term >= 0.0,
    })
}

/// Excess-risk bound for balanced ERM:
/// `K σ_max √((v / np) log(K A U / (δ σ_min √p)))`, requiring `p ≤ ½`.
pub fn slow_rate_erm_bound(inputs: &BoundInputs) -> Result<CheckedBound> {
    inputs.validate_common()?;
    if inputs.p > 0.5 {
        return Err(Error::Domain {
            name: "p",
            value: inputs.p,
            expected: "<= 1/2",
        });
    }
    let BoundInputs {
        n,
        p,
        v,
        a,
        envelope: u,
        delta,
        k_const: k,
        ..
    } = *inputs;
    let (smax, smin) = (inputs.sigma_max(), inputs.sigma_min());
    let arg = k * a * u / (delta * smin * p.sqrt());
    warn_small_log("slow_rate_erm_bound", arg);
    let log_term = arg.ln();
    let bound = k * smax * (v / (n * p) * log_term).sqrt();
    let validity = slow_rate_bound(&BoundInputs {
        sigma_plus: smin,
        ..*inputs
    })?;
    Ok(CheckedBound {
        bound,
        valid: validity.valid,
    })
}

/// `c₁ B K ṽ log(5 Ã √n / δ) / (2 n q (1 − q))`, where `(ṽ, Ã)` are the VC
/// parameters of the weighted excess-loss class.
#[allow(clippy::too_many_arguments)]
pub fn fast_rate_bound(
    n: f64,
    q: f64,
    v_tilde: f64,
    a_tilde: f64,
    bernstein: f64,
    delta: f64,
    k_const: f64,
    consts: &ConstantTable,
) -> Result<f64> {
    at_least("n", n, 1.0, ">= 1")?;
    open_unit("q", q)?;
    open_unit("delta", delta)?;
    positive("B", bernstein)?;
    positive("v_tilde", v_tilde)?;
    positive("A_tilde", a_tilde)?;
    if k_const.is_nan() || k_const <= 1.0 {
        return Err(Error::Domain {
            name: "K",
            value: k_const,
            expected: "> 1",
        });
    }
    let arg = 5.0 * a_tilde * n.sqrt() / delta;
    warn_small_log("fast_rate_bound", arg);
    Ok(consts.c1 * bernstein * k_const * v_tilde * arg.ln() / (2.0 * n * q * (1.0 - q)))
}

/// VC parameters of the weighted excess-loss class: `(4v + 1, 6A)`.
pub fn vc_transform(v: f64, a: f64) -> Result<(f64, f64)> {
    at_least("v", v, 1.0, ">= 1")?;
    at_least("A", a, 1.0, ">= 1")?;
    Ok((4.0 * v + 1.0, 6.0 * a))
}

pub use crate::erm::bernstein_constant_linear;

/// Multiplicative Chernoff interval for a Binomial count with mean `mu`:
/// `((1 − √(2 log(1/δ)/μ)) μ ∨ 0, (1 + √(3 log(1/δ)/μ)) μ)`, each side at level `δ`.
pub fn chernoff_interval(mu: f64, delta: f64) -> Result<(f64, f64)> {
    positive("mu", mu)?;
    open_unit("delta", delta)?;
    let l = (1.0 / delta).ln();
    let lower = ((1.0 - (2.0 * l / mu).sqrt()) * mu).max(0.0);
    let upper = (1.0 + (3.0 * l / mu).sqrt()) * mu;
    Ok((lower, upper))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PRatioBound {
    /// `√(2 log(1/δ) / (np))`.
    pub z_n: f64,
    /// `z_n / (1 − z_n)` bound on `p/p̂ − 1`; infinite when `z_n ≥ 1`.
    pub ratio_bound: f64,
    /// `2 z_n`, available when `z_n ≤ ½`.
    pub simplified: Option<f64>,
    pub valid: bool,
}

pub fn p_ratio_bound(n: f64, p: f64, delta: f64) -> Result<PRatioBound> {
    at_least("n", n, 1.0, ">= 1")?;
    open_unit("p", p)?;
    open_unit("delta", delta)?;
    let z_n = (2.0 * (1.0 / delta).ln() / (n * p)).sqrt();
    let valid = z_n < 1.0;
    Ok(PRatioBound {
        z_n,
        ratio_bound: if valid { z_n / (1.0 - z_n) } else { f64::INFINITY },
        simplified: (z_n <= 0.5).then_some(2.0 * z_n),
        valid,
    })
}

/// Volume of the Euclidean unit ball in `d` dimensions.
pub fn unit_ball_volume(d: usize) -> f64 {
    let h = d as f64 / 2.0;
    std::f64::consts::PI.powf(h) / libm::tgamma(h + 1.0)
}

/// Support regularity constants used by the k-NN radius envelope.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KnnBoundParams {
    /// Lower bound `b_X` on the feature density over its support.
    pub density_lower: f64,
    /// Fraction `c` of any small ball guaranteed to lie in the support.
    pub corner: f64,
    pub dim: usize,
    /// Radius `T` up to which `corner` holds.
    pub radius_limit: f64,
    pub delta: f64,
}

impl KnnBoundParams {
    pub fn unit_ball_volume(&self) -> f64 {
        unit_ball_volume(self.dim)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadiusEnvelope {
    pub tau_bar: f64,
    pub precondition_ok: bool,
}

/// `τ̄ = (2k / (n b_X c V_d))^{1/d}`, with the check
/// `8 d log(12 n / δ) ≤ k ≤ T^d n b_X c V_d / 2`.
pub fn knn_radius_envelope(k: usize, n: usize, params: &KnnBoundParams) -> Result<RadiusEnvelope> {
    if k == 0 || k > n {
        return Err(Error::InvalidK { k, n });
    }
    positive("b_X", params.density_lower)?;
    if !(params.corner > 0.0 && params.corner <= 1.0) {
        return Err(Error::Domain {
            name: "c",
            value: params.corner,
            expected: "(0, 1]",
        });
    }
    if params.dim == 0 {
        return Err(Error::Config("dimension must be at least 1".into()));
    }
    positive("T", params.radius_limit)?;
    open_unit("delta", params.delta)?;
    let d = params.dim as f64;
    let (kf, nf) = (k as f64, n as f64);
    let mass = nf * params.density_lower * params.corner * params.unit_ball_volume();
    let tau_bar = (2.0 * kf / mass).powf(1.0 / d);
    let lower = 8.0 * d * (12.0 * nf / params.delta).ln();
    let upper = params.radius_limit.powf(d) * mass / 2.0;
    Ok(RadiusEnvelope {
        tau_bar,
        precondition_ok: lower <= kf && kf <= upper,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubrootFixedPoint {
    pub r_star: f64,
    /// `2 (b² + c)`.
    pub upper: f64,
}

/// Fixed point of `ψ(r) = b √r + c`: `r* = ((b + √(b² + 4c)) / 2)²`.
pub fn subroot_fixed_point(b: f64, c: f64) -> Result<SubrootFixedPoint> {
    at_least("b", b, 0.0, ">= 0")?;
    at_least("c", c, 0.0, ">= 0")?;
    if b == 0.0 && c == 0.0 {
        return Err(Error::Config("b and c cannot both be zero".into()));
    }
    let root = 0.5 * (b + (b * b + 4.0 * c).sqrt());
    let r_star = root * root;
    let upper = 2.0 * (b * b + c);
    debug_assert!(r_star <= upper * (1.0 + 1e-12));
    Ok(SubrootFixedPoint { r_star, upper })
}

/// Fast-rate excess-risk bound for norm-constrained linear scores:
/// `c₁ (d+1) D² σ²_max / (μ σ²_min) · log(30 A √n / δ) / (n p̂ (1 − p̂))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstrainedInputs {
    pub n: f64,
    pub p_hat: f64,
    pub dim: usize,
    pub derivative_bound: f64,
    pub strong_convexity: f64,
    pub sigma_max_sq: f64,
    pub sigma_min_sq: f64,
    pub a: f64,
    pub delta: f64,
}

pub fn constrained_excess_bound(inputs: &ConstrainedInputs, consts: &ConstantTable) -> Result<f64> {
    at_least("n", inputs.n, 1.0, ">= 1")?;
    open_unit("p_hat", inputs.p_hat)?;
    open_unit("delta", inputs.delta)?;
    at_least("A", inputs.a, 1.0, ">= 1")?;
    if inputs.dim == 0 {
        return Err(Error::Config("dimension must be at least 1".into()));
    }
    let b = bernstein_constant_linear(
        inputs.derivative_bound,
        inputs.strong_convexity,
        inputs.sigma_max_sq,
        inputs.sigma_min_sq,
    )?;
    let arg = 30.0 * inputs.a * inputs.n.sqrt() / inputs.delta;
    warn_small_log("constrained_excess_bound", arg);
    Ok(consts.c1 * (inputs.dim as f64 + 1.0) * b * arg.ln() / (inputs.n * inputs.p_hat * (1.0 - inputs.p_hat)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;
    use rand::Rng;
    use rand_distr::{Binomial, Distribution};

    /// Midpoint Riemann sum of `∫₀^T e^{−t} √(1+t) dt`.
    fn riemann_inner_integral(panels: usize, upper: f64) -> f64 {
        let h = upper / panels as f64;
        let mut acc = 0.0;
        let mut comp = 0.0;
        for i in 0..panels {
            let t = (i as f64 + 0.5) * h;
            // Kahan summation keeps 1e7 terms accurate to well below 1e-10.
            let y = (-t).exp() * (1.0 + t).sqrt() * h - comp;
            let s = acc + y;
            comp = (s - acc) - y;
            acc = s;
        }
        acc
    }

    #[test]
    fn subroot_constant_bracketing_and_oracles() {
        let c = compute_subroot_constant();
        assert!(c > 12.0 && c <= 18.0, "{c}");
        // e Γ(3/2, 1) = 1 + e (√π / 2) erfc(1).
        let closed = 12.0 * (1.0 + std::f64::consts::E * 0.5 * std::f64::consts::PI.sqrt() * libm::erfc(1.0));
        assert!((c - closed).abs() < 1e-10, "{c} vs {closed}");
        let riemann = 12.0 * riemann_inner_integral(10_000_000, 60.0);
        assert!((c - riemann).abs() < 1e-8, "{c} vs {riemann}");
    }

    #[test]
    fn constant_table() {
        let t = ConstantTable::compute();
        assert_eq!(t.c1 / (t.c_subroot * t.c_subroot), 108.0);
        assert_eq!(t.k1, 60.0);
        assert_eq!(t.k2, 9216.0);
        assert_eq!(t.c_vc, 12.0);
    }

    #[test]
    fn vc_transform_cases() {
        assert_eq!(vc_transform(1.0, 1.0).unwrap(), (5.0, 6.0));
        let d = 2.0;
        assert_eq!(vc_transform(2.0 * (d + 1.0), 3.0).unwrap(), (25.0, 18.0));
        assert_eq!(vc_transform(2.0 * 3.5, 1.0).unwrap().0, 8.0 * 3.5 + 1.0);
        assert!(vc_transform(0.5, 1.0).is_err());
    }

    #[test]
    fn chernoff_examples() {
        let (lo, _) = chernoff_interval(100.0, (-2.0f64).exp()).unwrap();
        assert!((lo - 80.0).abs() < 1e-12);
        let (_, hi) = chernoff_interval(100.0, (-3.0f64).exp()).unwrap();
        assert!((hi - 130.0).abs() < 1e-12);
        let (lo, hi) = chernoff_interval(100.0, 1.0 - 1e-15).unwrap();
        assert!((lo - 100.0).abs() < 1e-5 && (hi - 100.0).abs() < 1e-5);
        assert_eq!(chernoff_interval(0.01, 0.01).unwrap().0, 0.0);
        assert!(chernoff_interval(0.0, 0.1).is_err());
    }

    #[test]
    fn chernoff_coverage() {
        let (n, p, delta) = (10_000u64, 0.01, 0.025);
        let (lo, hi) = chernoff_interval(n as f64 * p, delta).unwrap();
        let binom = Binomial::new(n, p).unwrap();
        let mut rng = substream(21, &[]);
        let runs = 10_000;
        let covered = (0..runs)
            .filter(|_| {
                let s = binom.sample(&mut rng) as f64;
                lo <= s && s <= hi
            })
            .count();
        assert!(covered as f64 / runs as f64 >= (1.0 - 2.0 * delta) - 0.01);
    }

    #[test]
    fn p_ratio_cases() {
        // z_n = ½ when 2 log(1/δ) / (np) = ¼.
        let delta = (-1.0f64).exp();
        let r = p_ratio_bound(8.0, 1.0 - 1e-16, delta).unwrap();
        assert!((r.z_n - 0.5).abs() < 1e-12);
        assert!((r.ratio_bound - 1.0).abs() < 1e-10);
        assert!(r.valid);
        assert!((r.simplified.unwrap() - 1.0).abs() < 1e-10);

        let big = p_ratio_bound(1e12, 0.01, 0.05).unwrap();
        assert!(big.ratio_bound < 1e-4);
        let tiny = p_ratio_bound(10.0, 0.01, 0.05).unwrap();
        assert!(!tiny.valid && tiny.ratio_bound.is_infinite() && tiny.simplified.is_none());
    }

    #[test]
    fn p_ratio_coverage() {
        let (n, p, delta) = (10_000u64, 0.01, 0.05);
        let bound = p_ratio_bound(n as f64, p, delta).unwrap();
        let binom = Binomial::new(n, p).unwrap();
        let mut rng = substream(22, &[]);
        let runs = 10_000;
        let held = (0..runs)
            .filter(|_| {
                let p_hat = binom.sample(&mut rng) as f64 / n as f64;
                p_hat > 0.0 && p / p_hat - 1.0 <= bound.ratio_bound
            })
            .count();
        assert!(held as f64 / runs as f64 >= 0.94);
    }

    #[test]
    fn subroot_cases() {
        let a = subroot_fixed_point(0.0, 3.0).unwrap();
        assert!((a.r_star - 3.0).abs() < 1e-15 && a.upper == 6.0);
        let b = subroot_fixed_point(2.0, 0.0).unwrap();
        assert!((b.r_star - 4.0).abs() < 1e-15 && b.upper == 8.0);
        let g = subroot_fixed_point(1.0, 1.0).unwrap();
        let golden = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((g.r_star - golden * golden).abs() < 1e-14);
        assert!((g.r_star - 2.618).abs() < 1e-3);
        assert_eq!(g.upper, 4.0);
        assert!((g.r_star.sqrt() + 1.0 - g.r_star).abs() < 1e-14);
        assert!(subroot_fixed_point(0.0, 0.0).is_err());
    }

    /// Independent re-evaluation of the slow-rate display, written out term by term.
    #[allow(clippy::too_many_arguments)]
    fn slow_rate_oracle(k: f64, s_pre: f64, s_log: f64, v: f64, n: f64, p: f64, a: f64, u: f64, delta: f64) -> f64 {
        let inside_log = (k * a * u) / (delta * s_log * p.powf(0.5));
        k * s_pre * (v * inside_log.ln() / (n * p)).powf(0.5)
    }

    #[test]
    fn slow_rate_matches_scripted_oracle() {
        let inputs = BoundInputs {
            n: 1e6,
            p: 1e-2,
            v: 1.0,
            a: 1.0,
            envelope: 1.0,
            sigma_plus: 1.0,
            sigma_minus: 1.0,
            delta: 0.1,
            k_const: 60.0,
            ..BoundInputs::default()
        };
        let got = slow_rate_bound(&inputs).unwrap();
        let want = slow_rate_oracle(60.0, 1.0, 1.0, 1.0, 1e6, 1e-2, 1.0, 1.0, 0.1);
        assert!((got.bound - want).abs() <= 1e-12 * want);
        assert!(got.valid);
    }

    #[test]
    fn slow_rate_monotonicity() {
        let base = BoundInputs::default();
        let mut prev = f64::INFINITY;
        for i in 0..20 {
            let n = 1e4 * 1.7f64.powi(i);
            let b = slow_rate_bound(&BoundInputs { n, ..base }).unwrap().bound;
            assert!(b < prev);
            prev = b;
        }
        let mut prev = f64::INFINITY;
        for i in 0..8 {
            let p = 1e-4 * 2f64.powi(i);
            let b = slow_rate_bound(&BoundInputs { p, ..base }).unwrap().bound;
            assert!(b < prev);
            prev = b;
        }
    }

    #[test]
    fn slow_rate_validity_flag() {
        let small = BoundInputs {
            n: 100.0,
            ..BoundInputs::default()
        };
        assert!(!slow_rate_bound(&small).unwrap().valid);
        let bad = BoundInputs {
            sigma_plus: 2.0,
            ..BoundInputs::default()
        };
        assert!(slow_rate_bound(&bad).is_err());
    }

    #[test]
    fn slow_rate_erm_cases() {
        let inputs = BoundInputs {
            sigma_plus: 0.4,
            sigma_minus: 0.9,
            v: 6.0,
            a: 2.0,
            ..BoundInputs::default()
        };
        let got = slow_rate_erm_bound(&inputs).unwrap().bound;
        let want = slow_rate_oracle(60.0, 0.9, 0.4, 6.0, 1e6, 0.01, 2.0, 1.0, 0.05);
        assert!((got - want).abs() <= 1e-12 * want);
        let mut prev = 0.0;
        for i in 1..=10 {
            let s = 0.4 + 0.06 * i as f64;
            let b = slow_rate_erm_bound(&BoundInputs {
                sigma_minus: s,
                ..inputs
            })
            .unwrap()
            .bound;
            assert!(b > prev);
            prev = b;
        }
        assert!(slow_rate_erm_bound(&BoundInputs { p: 0.6, ..inputs }).is_err());
    }

    #[test]
    fn fast_rate_properties() {
        let t = ConstantTable::compute();
        let f = |n: f64, q: f64, b: f64| fast_rate_bound(n, q, 5.0, 6.0, b, 0.05, 2.0, &t).unwrap();
        let mut rng = substream(4, &[]);
        for _ in 0..200 {
            let q: f64 = rng.gen_range(0.001..0.999);
            let n: f64 = rng.gen_range(10.0..1e8);
            let (a, b) = (f(n, q, 3.0), f(n, 1.0 - q, 3.0));
            assert!((a - b).abs() <= 1e-12 * a);
            assert!((f(n, q, 6.0) - 2.0 * a).abs() <= 1e-12 * a);
        }
        for n in [1e6, 1e7, 1e8] {
            let ratio = f(2.0 * n, 0.01, 2.0) / f(n, 0.01, 2.0);
            assert!((ratio - 0.5).abs() < 0.05 * 0.5, "{ratio}");
        }
        assert!(fast_rate_bound(1e3, 0.5, 5.0, 6.0, 2.0, 0.05, 1.0, &t).is_err());
    }

    #[test]
    fn constrained_bound_cases() {
        let t = ConstantTable::compute();
        let base = ConstrainedInputs {
            n: 1e4,
            p_hat: 0.05,
            dim: 1,
            derivative_bound: 1.0,
            strong_convexity: 1.0,
            sigma_max_sq: 1.0,
            sigma_min_sq: 1.0,
            a: 2.0,
            delta: 0.05,
        };
        let got = constrained_excess_bound(&base, &t).unwrap();
        let want = 2.0 * t.c1 * (30.0 * 2.0 * 1e4f64.sqrt() / 0.05).ln() / (1e4 * 0.05 * 0.95);
        assert!((got - want).abs() <= 1e-12 * want);

        let log_factor = |n: f64| (30.0 * 2.0 * n.sqrt() / 0.05).ln();
        let scaled = constrained_excess_bound(&ConstrainedInputs { n: 1e5, ..base }, &t).unwrap();
        let prefactor_ratio = (scaled / log_factor(1e5)) / (got / log_factor(1e4));
        assert!((prefactor_ratio - 0.1).abs() < 1e-12);

        // Composition with the generic fast rate at K = 2 and (ṽ, Ã) = vc_transform(2(d+1), A):
        // identical log term, prefactor (d+1) against 4·2(d+1)+1.
        for dim in 1..6 {
            let inputs = ConstrainedInputs { dim, ..base };
            let b = bernstein_constant_linear(1.0, 1.0, 1.0, 1.0).unwrap();
            let (vt, at) = vc_transform(2.0 * (dim as f64 + 1.0), base.a).unwrap();
            let generic = fast_rate_bound(base.n, base.p_hat, vt, at, b, base.delta, 2.0, &t).unwrap();
            let specific = constrained_excess_bound(&inputs, &t).unwrap();
            let expected = (dim as f64 + 1.0) / vt;
            assert!((specific / generic - expected).abs() < 1e-12);
            assert!(specific <= generic);
        }
    }

    #[test]
    fn unit_ball_volumes() {
        assert!((unit_ball_volume(1) - 2.0).abs() < 1e-12 * 2.0);
        assert!((unit_ball_volume(2) - std::f64::consts::PI).abs() < 1e-12 * std::f64::consts::PI);
        let v3 = 4.0 / 3.0 * std::f64::consts::PI;
        assert!((unit_ball_volume(3) - v3).abs() < 1e-12 * v3);
    }

    #[test]
    fn radius_envelope_cases() {
        let params = KnnBoundParams {
            density_lower: 2.0 / std::f64::consts::PI,
            corner: 1.0,
            dim: 2,
            radius_limit: 1.0,
            delta: 0.05,
        };
        let env = knn_radius_envelope(100, 10_000, &params).unwrap();
        assert!((env.tau_bar - 0.1).abs() < 1e-12);
        let doubled = knn_radius_envelope(200, 10_000, &params).unwrap();
        assert!((doubled.tau_bar / env.tau_bar - 2f64.sqrt()).abs() < 1e-12);
        assert!(knn_radius_envelope(0, 10, &params).is_err());
    }

    #[test]
    fn all_bounds_finite_and_nonnegative() {
        let t = ConstantTable::compute();
        let mut rng = substream(6, &[]);
        for _ in 0..500 {
            let u = rng.gen_range(0.1..10.0);
            let inputs = BoundInputs {
                n: rng.gen_range(1.0..1e9),
                p: rng.gen_range(1e-6..0.5),
                v: rng.gen_range(1.0..20.0),
                a: rng.gen_range(1.0..20.0),
                envelope: u,
                sigma_plus: rng.gen_range(0.01..=1.0) * u,
                sigma_minus: rng.gen_range(0.01..=1.0) * u,
                delta: rng.gen_range(1e-6..0.5),
                k_const: rng.gen_range(1.0..100.0),
                ..BoundInputs::default()
            };
            for b in [
                slow_rate_bound(&inputs).unwrap().bound,
                slow_rate_erm_bound(&inputs).unwrap().bound,
            ] {
                assert!(b.is_finite() && b >= 0.0, "{inputs:?}");
            }
            let f = fast_rate_bound(inputs.n, inputs.p, 5.0, 6.0, 2.0, inputs.delta, 2.0, &t).unwrap();
            assert!(f.is_finite() && f >= 0.0);
        }
    }

    #[test]
    fn random_subroot_fixed_points() {
        let mut rng = substream(7, &[]);
        for _ in 0..1000 {
            let b: f64 = rng.gen_range(0.0..100.0);
            let c: f64 = rng.gen_range(1e-6..100.0);
            let fp = subroot_fixed_point(b, c).unwrap();
            let psi = b * fp.r_star.sqrt() + c;
            assert!((psi - fp.r_star).abs() <= 1e-10 * fp.r_star);
            assert!(fp.r_star <= fp.upper);
        }
    }
}
