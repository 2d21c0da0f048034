//! Stratified conditional-logit estimation of the case-control partial
//! likelihood, with sandwich covariance and AIC ledgers.
//!
//! Each stratum holds the event row (row 0) and its controls. Strata with a
//! single row carry no information and contribute nothing.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::design::DesignMatrix;
use crate::error::{Error, Result};
use crate::statistics::StatKind;

/// Strata reduced in fixed blocks so sums do not depend on thread count.
const BLOCK: usize = 128;

#[derive(Debug, Clone, PartialEq)]
pub struct ChoiceStratum {
    pub rows: usize,
    /// `rows * columns` values, row-major; row 0 is the event.
    pub values: Vec<f64>,
}

impl ChoiceStratum {
    pub fn is_informative(&self) -> bool {
        self.rows > 1
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChoiceData {
    pub columns: Vec<StatKind>,
    pub strata: Vec<ChoiceStratum>,
}

impl ChoiceData {
    pub fn new(columns: Vec<StatKind>, strata: Vec<ChoiceStratum>) -> Result<Self> {
        let p = columns.len();
        for (i, s) in strata.iter().enumerate() {
            if s.rows == 0 {
                return Err(Error::InvalidQuery(format!("stratum {i} has no rows")));
            }
            if s.values.len() != s.rows * p {
                return Err(Error::Dimension { expected: s.rows * p, got: s.values.len() });
            }
            if s.values.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite { stratum: i });
            }
        }
        Ok(ChoiceData { columns, strata })
    }

    pub fn from_design(design: &DesignMatrix) -> Result<Self> {
        Self::from_design_owned(design.clone())
    }

    /// Takes the design's storage without copying it.
    pub fn from_design_owned(design: DesignMatrix) -> Result<Self> {
        let strata = design
            .strata
            .into_iter()
            .map(|s| ChoiceStratum { rows: s.rows, values: s.values })
            .collect();
        Self::new(design.columns, strata)
    }

    pub fn n_columns(&self) -> usize {
        self.columns.len()
    }

    pub fn n_informative(&self) -> usize {
        self.strata.iter().filter(|s| s.is_informative()).count()
    }

    pub fn column_index(&self, kind: StatKind) -> Option<usize> {
        self.columns.iter().position(|&k| k == kind)
    }

    /// Log partial likelihood of the model with every coefficient at zero.
    pub fn null_log_pl(&self) -> f64 {
        -self.strata.iter().map(|s| (s.rows as f64).ln()).sum::<f64>()
    }

    /// True when column `c` is constant within every informative stratum.
    pub fn is_degenerate(&self, c: usize) -> bool {
        let p = self.columns.len();
        self.strata.iter().filter(|s| s.is_informative()).all(|s| {
            let x0 = s.values[c];
            (1..s.rows).all(|r| s.values[r * p + c] == x0)
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Derivatives {
    None,
    Gradient,
    Hessian,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Likelihood {
    pub value: f64,
    pub gradient: Option<DVector<f64>>,
    pub hessian: Option<DMatrix<f64>>,
}

struct Accum {
    ll: f64,
    grad: Vec<f64>,
    hess: Vec<f64>,
    /// Per-stratum scores, in stratum order (only when requested).
    scores: Vec<f64>,
}

impl Accum {
    fn new(q: usize) -> Self {
        Accum { ll: 0.0, grad: vec![0.0; q], hess: vec![0.0; q * q], scores: Vec::new() }
    }

    fn add(&mut self, other: Accum) {
        self.ll += other.ll;
        for (a, b) in self.grad.iter_mut().zip(&other.grad) {
            *a += b;
        }
        for (a, b) in self.hess.iter_mut().zip(&other.hess) {
            *a += b;
        }
        self.scores.extend(other.scores);
    }
}

struct Work {
    eta: Vec<f64>,
    xbar: Vec<f64>,
    d: Vec<f64>,
}

fn stratum_into(
    s: &ChoiceStratum,
    p: usize,
    cols: &[usize],
    beta: &[f64],
    level: Derivatives,
    scores: bool,
    w: &mut Work,
    acc: &mut Accum,
) {
    let q = cols.len();
    let row = |r: usize| &s.values[r * p..(r + 1) * p];
    w.eta.clear();
    for r in 0..s.rows {
        let x = row(r);
        w.eta.push(cols.iter().zip(beta).map(|(&c, &b)| b * x[c]).sum());
    }
    let m = w.eta.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let shifted0 = w.eta[0] - m;
    let mut total = 0.0;
    for e in w.eta.iter_mut() {
        *e = (*e - m).exp();
        total += *e;
    }
    // w.eta now holds unnormalized weights.
    acc.ll += shifted0 - total.ln();
    if level == Derivatives::None && !scores {
        return;
    }
    w.xbar.iter_mut().for_each(|v| *v = 0.0);
    for r in 0..s.rows {
        let pr = w.eta[r] / total;
        let x = row(r);
        for (j, &c) in cols.iter().enumerate() {
            w.xbar[j] += pr * x[c];
        }
    }
    let x0 = row(0);
    for (j, &c) in cols.iter().enumerate() {
        let u = x0[c] - w.xbar[j];
        acc.grad[j] += u;
        if scores {
            acc.scores.push(u);
        }
    }
    if level != Derivatives::Hessian {
        return;
    }
    for r in 0..s.rows {
        let pr = w.eta[r] / total;
        if pr == 0.0 {
            continue;
        }
        let x = row(r);
        for (j, &c) in cols.iter().enumerate() {
            w.d[j] = x[c] - w.xbar[j];
        }
        for a in 0..q {
            let da = pr * w.d[a];
            for b in a..q {
                acc.hess[a * q + b] -= da * w.d[b];
            }
        }
    }
}

fn accumulate(data: &ChoiceData, cols: &[usize], beta: &[f64], level: Derivatives, scores: bool) -> Accum {
    let p = data.columns.len();
    let q = cols.len();
    let blocks: Vec<Accum> = data
        .strata
        .par_chunks(BLOCK)
        .map(|chunk| {
            let mut acc = Accum::new(q);
            let mut w = Work { eta: Vec::new(), xbar: vec![0.0; q], d: vec![0.0; q] };
            for s in chunk.iter().filter(|s| s.is_informative()) {
                stratum_into(s, p, cols, beta, level, scores, &mut w, &mut acc);
            }
            acc
        })
        .collect();
    let mut total = Accum::new(q);
    for b in blocks {
        total.add(b);
    }
    for a in 0..q {
        for b in 0..a {
            total.hess[a * q + b] = total.hess[b * q + a];
        }
    }
    total
}

/// Log partial likelihood at `beta` (one entry per data column), with the
/// analytic gradient and Hessian on request.
pub fn log_partial_likelihood(data: &ChoiceData, beta: &[f64], level: Derivatives) -> Result<Likelihood> {
    if beta.len() != data.n_columns() {
        return Err(Error::Dimension { expected: data.n_columns(), got: beta.len() });
    }
    let cols: Vec<usize> = (0..data.n_columns()).collect();
    let acc = accumulate(data, &cols, beta, level, false);
    let q = cols.len();
    Ok(Likelihood {
        value: acc.ll,
        gradient: (level != Derivatives::None).then(|| DVector::from_vec(acc.grad)),
        hessian: (level == Derivatives::Hessian).then(|| DMatrix::from_row_slice(q, q, &acc.hess)),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FitOptions {
    /// Gradient tolerance (max absolute component).
    pub gtol: f64,
    /// Relative log-likelihood change tolerance.
    pub ftol: f64,
    pub max_iter: usize,
    /// Coefficients beyond this magnitude are reported as separation.
    pub separation_bound: f64,
    /// Diagonal ridge added when the information matrix is not positive definite.
    pub ridge: f64,
    pub max_halvings: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions { gtol: 1e-8, ftol: 1e-10, max_iter: 100, separation_bound: 50.0, ridge: 1e-8, max_halvings: 40 }
    }
}

impl FitOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.gtol > 0.0 && self.ftol > 0.0 && self.separation_bound > 0.0 && self.ridge >= 0.0) {
            return Err(Error::Config("tolerances must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub kind: StatKind,
    pub coefficient: f64,
    pub robust_se: f64,
    pub naive_se: f64,
    /// Robust z-value.
    pub z: f64,
    /// Two-sided normal p-value on the robust z.
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub columns: Vec<StatKind>,
    /// One entry per column; `None` for degenerate columns.
    pub estimates: Vec<Option<Estimate>>,
    /// Kinds of the free coefficients, in covariance order.
    pub free: Vec<StatKind>,
    pub robust_cov: Vec<Vec<f64>>,
    pub naive_cov: Vec<Vec<f64>>,
    pub log_pl: f64,
    pub null_log_pl: f64,
    pub aic: f64,
    pub n_params: usize,
    pub iterations: usize,
    pub converged: bool,
    pub separation: bool,
    /// The information matrix was singular at the optimum; pseudo-inverse used.
    pub singular: bool,
    pub degenerate: Vec<StatKind>,
    pub strata: usize,
    pub informative_strata: usize,
}

impl FitResult {
    pub fn estimate(&self, kind: StatKind) -> Option<&Estimate> {
        self.estimates.iter().flatten().find(|e| e.kind == kind)
    }

    pub fn coefficient(&self, kind: StatKind) -> Option<f64> {
        self.estimate(kind).map(|e| e.coefficient)
    }

    /// Coefficient table: statistic, estimate, robust SE, z, p.
    pub fn table(&self) -> String {
        let mut out = String::from("statistic\testimate\trobust_se\tz\tp\n");
        for (kind, e) in self.columns.iter().zip(&self.estimates) {
            match e {
                Some(e) => writeln!(
                    out,
                    "{}\t{}\t{}\t{}\t{}",
                    kind.display_name(),
                    format_sig(e.coefficient),
                    format_sig(e.robust_se),
                    format_sig(e.z),
                    format_sig(e.p)
                ),
                None => writeln!(out, "{}\tNA\tNA\tNA\tNA", kind.display_name()),
            }
            .expect("write to string");
        }
        out
    }

    pub fn metadata(&self) -> String {
        format!(
            "log_pl\t{}\naic\t{}\nparameters\t{}\niterations\t{}\nconverged\t{}\nseparation\t{}\nsingular\t{}\nstrata\t{}\ninformative_strata\t{}\n",
            format_sig(self.log_pl),
            format_sig(self.aic),
            self.n_params,
            self.iterations,
            self.converged,
            self.separation,
            self.singular,
            self.strata,
            self.informative_strata
        )
    }
}

/// Formats with six significant digits.
pub fn format_sig(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    if x == 0.0 {
        return "0".into();
    }
    let mag = x.abs().log10().floor() as i32;
    if (-5..15).contains(&mag) {
        let decimals = (5 - mag).max(0) as usize;
        format!("{x:.decimals$}")
    } else {
        format!("{x:.5e}")
    }
}

/// Inverse of a symmetric positive semidefinite matrix; falls back to the
/// pseudo-inverse (flagged) when Cholesky fails.
fn spd_inverse(m: &DMatrix<f64>) -> (DMatrix<f64>, bool) {
    if m.nrows() == 0 {
        return (m.clone(), false);
    }
    if let Some(ch) = m.clone().cholesky() {
        let inv = ch.inverse();
        if inv.iter().all(|v| v.is_finite()) {
            return (inv, false);
        }
    }
    let pinv = m.clone().pseudo_inverse(1e-12).unwrap_or_else(|_| DMatrix::zeros(m.nrows(), m.ncols()));
    (pinv, true)
}

fn newton_direction(info: &DMatrix<f64>, grad: &DVector<f64>, ridge: f64) -> DVector<f64> {
    if let Some(ch) = info.clone().cholesky() {
        return ch.solve(grad);
    }
    let ridged = info + DMatrix::identity(info.nrows(), info.ncols()) * ridge;
    if let Some(ch) = ridged.cholesky() {
        return ch.solve(grad);
    }
    let pinv = info.clone().pseudo_inverse(1e-12).unwrap_or_else(|_| DMatrix::zeros(info.nrows(), info.ncols()));
    pinv * grad
}

/// Robust covariance `H⁻¹ (Σ u_s u_sᵀ) H⁻¹` at `beta`, clustering by stratum.
/// Returns the robust and naive covariances and a singularity flag.
pub fn robust_variance(data: &ChoiceData, beta: &[f64]) -> Result<(DMatrix<f64>, DMatrix<f64>, bool)> {
    if beta.len() != data.n_columns() {
        return Err(Error::Dimension { expected: data.n_columns(), got: beta.len() });
    }
    let cols: Vec<usize> = (0..data.n_columns()).collect();
    Ok(sandwich(data, &cols, beta))
}

fn sandwich(data: &ChoiceData, cols: &[usize], beta: &[f64]) -> (DMatrix<f64>, DMatrix<f64>, bool) {
    let q = cols.len();
    let acc = accumulate(data, cols, beta, Derivatives::Hessian, true);
    let info = -DMatrix::from_row_slice(q, q, &acc.hess);
    let (naive, singular) = spd_inverse(&info);
    let mut meat = DMatrix::<f64>::zeros(q, q);
    for u in acc.scores.chunks(q.max(1)) {
        if q == 0 {
            break;
        }
        let u = DVector::from_column_slice(u);
        meat += &u * u.transpose();
    }
    let robust = &naive * meat * &naive;
    let robust = (&robust + robust.transpose()) * 0.5;
    (robust, naive, singular)
}

/// Fits every column of `data`.
pub fn fit(data: &ChoiceData, opts: &FitOptions) -> Result<FitResult> {
    let cols: Vec<usize> = (0..data.n_columns()).collect();
    fit_columns(data, &cols, opts)
}

/// Fits the sub-model using only the listed columns.
pub fn fit_columns(data: &ChoiceData, cols: &[usize], opts: &FitOptions) -> Result<FitResult> {
    opts.validate()?;
    let p = data.n_columns();
    if let Some(&c) = cols.iter().find(|&&c| c >= p) {
        return Err(Error::Dimension { expected: p, got: c + 1 });
    }
    let informative = data.n_informative();
    if informative == 0 {
        return Err(Error::NoInformativeStrata);
    }
    let (degenerate, free): (Vec<usize>, Vec<usize>) = cols.iter().partition(|&&c| data.is_degenerate(c));
    let q = free.len();

    let mut beta = vec![0.0; q];
    let mut cur = accumulate(data, &free, &beta, Derivatives::Hessian, false);
    let mut iterations = 0;
    let mut converged = false;
    let mut separation = false;
    let mut change = f64::INFINITY;
    if q == 0 {
        converged = true;
    }
    while q > 0 && !converged {
        let gmax = cur.grad.iter().fold(0.0f64, |m, g| m.max(g.abs()));
        if gmax < opts.gtol && change < opts.ftol {
            converged = true;
            break;
        }
        if iterations >= opts.max_iter {
            break;
        }
        let info = -DMatrix::from_row_slice(q, q, &cur.hess);
        let dir = newton_direction(&info, &DVector::from_column_slice(&cur.grad), opts.ridge);
        let mut t = 1.0;
        let mut next = None;
        for _ in 0..=opts.max_halvings {
            let cand: Vec<f64> = beta.iter().zip(dir.iter()).map(|(b, d)| b + t * d).collect();
            let e = accumulate(data, &free, &cand, Derivatives::Hessian, false);
            let slack = 1e-14 * cur.ll.abs().max(1.0);
            if e.ll.is_finite() && e.ll >= cur.ll - slack {
                next = Some((cand, e));
                break;
            }
            t *= 0.5;
        }
        iterations += 1;
        let Some((cand, e)) = next else {
            converged = gmax < opts.gtol;
            break;
        };
        change = (e.ll - cur.ll).abs() / cur.ll.abs().max(f64::MIN_POSITIVE);
        beta = cand;
        cur = e;
        if beta.iter().any(|b| b.abs() > opts.separation_bound) {
            separation = true;
            break;
        }
    }

    let (robust, naive, singular) = sandwich(data, &free, &beta);
    // A finite maximum of a concave likelihood drops along the ray beyond it;
    // a monotone likelihood does not.
    if !separation && beta.iter().any(|b| b.abs() > 1.0) {
        let doubled: Vec<f64> = beta.iter().map(|b| 2.0 * b).collect();
        let far = accumulate(data, &free, &doubled, Derivatives::None, false).ll;
        if far >= cur.ll - 1e-9 * cur.ll.abs().max(1.0) {
            separation = true;
        }
    }
    let mut estimates: Vec<Option<Estimate>> = vec![None; cols.len()];
    for (j, &c) in free.iter().enumerate() {
        let pos = cols.iter().position(|&x| x == c).expect("free column listed");
        let robust_se = robust[(j, j)].max(0.0).sqrt();
        let naive_se = naive[(j, j)].max(0.0).sqrt();
        let z = beta[j] / robust_se;
        estimates[pos] = Some(Estimate {
            kind: data.columns[c],
            coefficient: beta[j],
            robust_se,
            naive_se,
            z,
            p: erfc(z.abs() / std::f64::consts::SQRT_2),
        });
    }
    let to_rows = |m: &DMatrix<f64>| (0..q).map(|i| (0..q).map(|j| m[(i, j)]).collect()).collect();
    let log_pl = cur.ll;
    Ok(FitResult {
        columns: cols.iter().map(|&c| data.columns[c]).collect(),
        estimates,
        free: free.iter().map(|&c| data.columns[c]).collect(),
        robust_cov: to_rows(&robust),
        naive_cov: to_rows(&naive),
        log_pl,
        null_log_pl: data.null_log_pl(),
        aic: aic_value(q, log_pl),
        n_params: q,
        iterations,
        converged,
        separation,
        singular,
        degenerate: degenerate.iter().map(|&c| data.columns[c]).collect(),
        strata: data.strata.len(),
        informative_strata: informative,
    })
}

fn aic_value(params: usize, log_pl: f64) -> f64 {
    2.0 * params as f64 - 2.0 * log_pl
}

pub fn aic(fit: &FitResult) -> f64 {
    aic_value(fit.n_params, fit.log_pl)
}

fn indices(data: &ChoiceData, kinds: &[StatKind]) -> Result<Vec<usize>> {
    kinds
        .iter()
        .map(|&k| {
            data.column_index(k)
                .ok_or_else(|| Error::Config(format!("kind `{k}` is not a column of the data")))
        })
        .collect()
}

fn converged_aic(data: &ChoiceData, cols: &[usize], opts: &FitOptions) -> Result<Option<f64>> {
    if cols.is_empty() {
        return Ok(Some(aic_value(0, data.null_log_pl())));
    }
    let f = fit_columns(data, cols, opts)?;
    Ok((f.converged && !f.separation).then_some(f.aic))
}

/// `(AIC(focal only) − AIC(null), AIC(full) − AIC(full without focal))`;
/// a cell is `None` when a required fit did not converge.
pub fn aic_ledger(
    data: &ChoiceData,
    kinds: &[StatKind],
    focal: StatKind,
    opts: &FitOptions,
) -> Result<(Option<f64>, Option<f64>)> {
    let full = indices(data, kinds)?;
    let f = indices(data, &[focal])?[0];
    if !full.contains(&f) {
        return Err(Error::Config(format!("focal kind `{focal}` is not in the model")));
    }
    let null = aic_value(0, data.null_log_pl());
    let drop: Vec<usize> = full.iter().copied().filter(|&c| c != f).collect();
    let over_null = converged_aic(data, &[f], opts)?.map(|a| a - null);
    let in_full = match (converged_aic(data, &full, opts)?, converged_aic(data, &drop, opts)?) {
        (Some(a), Some(b)) => Some(a - b),
        _ => None,
    };
    Ok((over_null, in_full))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub kind: StatKind,
    pub over_null: Option<f64>,
    pub over_null_pct: Option<f64>,
    pub in_full: Option<f64>,
    pub in_full_pct: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AicLedger {
    pub null_aic: f64,
    pub full_aic: Option<f64>,
    /// AIC(full) − AIC(null): the 100% reference.
    pub total: Option<f64>,
    /// Sorted by over-null delta, most negative first.
    pub entries: Vec<LedgerEntry>,
}

/// Ledger over every kind of the full model.
pub fn aic_ledger_table(data: &ChoiceData, kinds: &[StatKind], opts: &FitOptions) -> Result<AicLedger> {
    let full = indices(data, kinds)?;
    let null_aic = aic_value(0, data.null_log_pl());
    let full_aic = converged_aic(data, &full, opts)?;
    let total = full_aic.map(|f| f - null_aic);
    let pct = |d: Option<f64>| match (d, total) {
        (Some(d), Some(t)) if t != 0.0 => Some(d / t * 100.0),
        _ => None,
    };
    let mut entries = Vec::with_capacity(full.len());
    for (&kind, &f) in kinds.iter().zip(&full) {
        let drop: Vec<usize> = full.iter().copied().filter(|&c| c != f).collect();
        let over_null = converged_aic(data, &[f], opts)?.map(|a| a - null_aic);
        let in_full = match (full_aic, converged_aic(data, &drop, opts)?) {
            (Some(a), Some(b)) => Some(a - b),
            _ => None,
        };
        entries.push(LedgerEntry {
            kind,
            over_null,
            over_null_pct: pct(over_null),
            in_full,
            in_full_pct: pct(in_full),
        });
    }
    entries.sort_by(|a, b| {
        let key = |e: &LedgerEntry| e.over_null.unwrap_or(f64::INFINITY);
        key(a).total_cmp(&key(b))
    });
    Ok(AicLedger { null_aic, full_aic, total, entries })
}

fn ledger_cell(d: Option<f64>, pct: Option<f64>) -> String {
    match (d, pct) {
        (Some(d), Some(p)) => format!("{d:.3} ({p:.1}%)"),
        (Some(d), None) => format!("{d:.3}"),
        _ => "unavailable".into(),
    }
}

impl AicLedger {
    pub fn row(&self, e: &LedgerEntry) -> String {
        format!(
            "{} {}\t{}",
            e.kind.display_name(),
            ledger_cell(e.over_null, e.over_null_pct),
            ledger_cell(e.in_full, e.in_full_pct)
        )
    }

    /// One row per effect: name, delta over null (percent), delta in full (percent).
    pub fn table(&self) -> String {
        let mut out = String::from("effect over_null (pct)\tin_full (pct)\n");
        for e in &self.entries {
            out.push_str(&self.row(e));
            out.push('\n');
        }
        match self.total {
            Some(t) => writeln!(out, "Full model {t:.3} (100.0%)").expect("write to string"),
            None => out.push_str("Full model unavailable\n"),
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateRatio {
    pub ratio: f64,
    pub lower: f64,
    pub upper: f64,
}

/// Rate ratio for a change of `delta` in the (transformed) statistic,
/// with a 95% interval from the standard error.
pub fn interpret(coefficient: f64, se: f64, delta: f64) -> RateRatio {
    let a = ((coefficient - 1.96 * se) * delta).exp();
    let b = ((coefficient + 1.96 * se) * delta).exp();
    RateRatio { ratio: (coefficient * delta).exp(), lower: a.min(b), upper: a.max(b) }
}

pub fn interpret_fit(fit: &FitResult, kind: StatKind, delta: f64) -> Result<RateRatio> {
    if !fit.columns.contains(&kind) {
        return Err(Error::Config(format!("kind `{kind}` is not in the fit")));
    }
    let e = fit
        .estimate(kind)
        .ok_or_else(|| Error::InvalidQuery(format!("kind `{kind}` is degenerate in this fit")))?;
    Ok(interpret(e.coefficient, e.robust_se, delta))
}
