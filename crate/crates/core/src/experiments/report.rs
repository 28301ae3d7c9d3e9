//! Tabulates every rate bound for one set of inputs.

use crate::bounds::{
    chernoff_interval, fast_rate_bound, p_ratio_bound, slow_rate_bound, slow_rate_erm_bound, vc_transform, BoundInputs,
    ConstantTable,
};
use crate::error::Result;
use crate::experiments::ResultRow;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundReportInputs {
    pub n: f64,
    pub p: f64,
    pub v: f64,
    pub a: f64,
    pub envelope: f64,
    pub bernstein: f64,
    pub delta: f64,
    pub k_const: f64,
    /// Defaults to the envelope when absent.
    pub sigma_plus: Option<f64>,
    pub sigma_minus: Option<f64>,
}

impl Default for BoundReportInputs {
    fn default() -> Self {
        Self {
            n: 1e6,
            p: 0.01,
            v: 1.0,
            a: 1.0,
            envelope: 1.0,
            bernstein: 2.0,
            delta: 0.05,
            k_const: crate::bounds::DEFAULT_SLOW_RATE_K,
            sigma_plus: None,
            sigma_minus: None,
        }
    }
}

impl BoundReportInputs {
    fn bound_inputs(&self) -> BoundInputs {
        BoundInputs {
            n: self.n,
            p: self.p,
            q: self.p,
            v: self.v,
            a: self.a,
            envelope: self.envelope,
            sigma_plus: self.sigma_plus.unwrap_or(self.envelope),
            sigma_minus: self.sigma_minus.unwrap_or(self.envelope),
            bernstein: self.bernstein,
            delta: self.delta,
            k_const: self.k_const,
        }
    }

    pub fn describe(&self) -> Vec<(String, String)> {
        let b = self.bound_inputs();
        [
            ("n", b.n),
            ("p", b.p),
            ("v", b.v),
            ("A", b.a),
            ("U", b.envelope),
            ("B", b.bernstein),
            ("delta", b.delta),
            ("K", b.k_const),
            ("sigma_plus", b.sigma_plus),
            ("sigma_minus", b.sigma_minus),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), format!("{v}")))
        .collect()
    }
}

fn row(name: &str, outcome: Result<(f64, bool)>, b: &BoundInputs) -> ResultRow {
    let (value, valid, note) = match outcome {
        Ok((v, ok)) => (v, ok, String::new()),
        Err(e) => (f64::NAN, false, e.to_string()),
    };
    ResultRow::new()
        .with("bound", name)
        .with("value", value)
        .with("valid", valid)
        .with("n", b.n)
        .with("p", b.p)
        .with("v", b.v)
        .with("A", b.a)
        .with("U", b.envelope)
        .with("B", b.bernstein)
        .with("delta", b.delta)
        .with("K", b.k_const)
        .with("sigma_plus", b.sigma_plus)
        .with("sigma_minus", b.sigma_minus)
        .with("note", note)
}

/// One row per bound. A failing bound yields `valid = false`, `value = NaN`
/// and the error text; the remaining rows are unaffected.
pub fn run_bound_report(inputs: &BoundReportInputs) -> Vec<ResultRow> {
    let consts = ConstantTable::compute();
    let b = inputs.bound_inputs();
    let slow = slow_rate_bound(&b).map(|c| (c.bound, c.valid));
    let slow_erm = slow_rate_erm_bound(&b).map(|c| (c.bound, c.valid));
    let fast = vc_transform(b.v, b.a)
        .and_then(|(vt, at)| fast_rate_bound(b.n, b.p, vt, at, b.bernstein, b.delta, b.k_const, &consts))
        .map(|f| (f, true));
    let ratio = match (&fast, &slow_erm) {
        (Ok((f, _)), Ok((s, ok))) => Ok((f / s, *ok)),
        (Err(_), _) => Err(crate::Error::Config("fast rate unavailable".into())),
        (_, Err(_)) => Err(crate::Error::Config("slow rate unavailable".into())),
    };
    let p_ratio = p_ratio_bound(b.n, b.p, b.delta).map(|r| (r.ratio_bound, r.valid));
    let chernoff = chernoff_interval(b.n * b.p, b.delta);
    let chernoff_lo = chernoff.as_ref().map(|c| (c.0, true)).map_err(clone_err);
    let chernoff_hi = chernoff.map(|c| (c.1, true));
    vec![
        row("slow_rate", slow, &b),
        row("slow_rate_erm", slow_erm, &b),
        row("fast_rate", fast, &b),
        row("fast_slow_ratio", ratio, &b),
        row("p_ratio", p_ratio, &b),
        row("chernoff_lower", chernoff_lo, &b),
        row("chernoff_upper", chernoff_hi, &b),
    ]
}

fn clone_err(e: &crate::Error) -> crate::Error {
    crate::Error::Config(e.to_string())
}
