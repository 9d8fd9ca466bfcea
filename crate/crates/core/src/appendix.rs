//! A compactly supported `L^1` function that is not `L^{1+eps}`.
//!
//! `h_{N,a} = (sum_j a_j delta_{n_j}) * sinc(2x/N)` with `n_j = -N^2 + (2j-1)N`
//! has Fourier transform `g(t) = (N/2) sum_j a_j e^{-2 pi i n_j t}` on
//! `[-1/N, 1/N]`. Everything here is computed on that Fourier side.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::error::{Error, Result};

pub const DEFAULT_C1: f64 = 0.1;
pub const L1_CONSTANT: f64 = 10.0;
/// Relative quadrature error above which a grid is rejected.
pub const MAX_RELATIVE_ERROR: f64 = 0.01;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SignVector {
    pub n: usize,
    pub a: Vec<i8>,
    pub seed: u64,
    pub trial: u64,
}

impl SignVector {
    pub fn new(a: Vec<i8>, seed: u64) -> Result<Self> {
        if a.len() < 2 {
            return Err(Error::Precondition(format!("need at least 2 signs, got {}", a.len())));
        }
        if let Some(x) = a.iter().find(|x| x.abs() != 1) {
            return Err(Error::Domain(format!("sign entries must be +1 or -1, found {x}")));
        }
        Ok(SignVector { n: a.len(), a, seed, trial: 0 })
    }

    pub fn ones(n: usize) -> Result<Self> {
        Self::new(vec![1; n], 0)
    }

    /// Uniform signs from the ChaCha8 stream `trial` of `seed`.
    pub fn random(n: usize, seed: u64, trial: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(trial);
        let a = (0..n).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect();
        SignVector { n, a, seed, trial }
    }
}

pub fn node(n: usize, j: usize) -> i64 {
    let n = n as i64;
    -n * n + (2 * j as i64 - 1) * n
}

/// `t -> (N/2) sum_j a_j e^{-2 pi i n_j t}` on `[-1/N, 1/N]`, zero outside.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrigPolyOnInterval {
    pub n: usize,
    pub a: Vec<i8>,
}

impl TrigPolyOnInterval {
    pub fn nodes(&self) -> Vec<i64> {
        (1..=self.n).map(|j| node(self.n, j)).collect()
    }

    pub fn half_width(&self) -> f64 {
        1.0 / self.n as f64
    }

    pub fn value(&self, t: f64) -> Complex64 {
        if t.abs() > self.half_width() {
            return Complex64::new(0.0, 0.0);
        }
        let s: Complex64 = self
            .nodes()
            .iter()
            .zip(&self.a)
            .map(|(&nj, &aj)| Complex64::from_polar(aj as f64, -2.0 * PI * nj as f64 * t))
            .sum();
        s * (self.n as f64 / 2.0)
    }

    /// Triangle-inequality bound `N * N/2` on `|g|`.
    pub fn sup_bound(&self) -> f64 {
        (self.n * self.n) as f64 / 2.0
    }

    /// Lipschitz constant of `|g|`: `(N/2) * 2 pi sum_j |n_j|`.
    pub fn lipschitz(&self) -> f64 {
        let s: i64 = self.nodes().iter().map(|x| x.abs()).sum();
        self.n as f64 / 2.0 * 2.0 * PI * s as f64
    }

    /// The space-side function `h_{N,a}(x) = sum_j a_j sinc(2(x - n_j)/N)`.
    pub fn space_value(&self, x: f64) -> f64 {
        let n = self.n as f64;
        self.nodes()
            .iter()
            .zip(&self.a)
            .map(|(&nj, &aj)| {
                let y = 2.0 * (x - nj as f64) / n;
                let s = if y == 0.0 { 1.0 } else { (PI * y).sin() / (PI * y) };
                aj as f64 * s
            })
            .sum()
    }
}

pub fn build_fourier_side(n: usize, a: &SignVector) -> Result<TrigPolyOnInterval> {
    if n < 2 {
        return Err(Error::Precondition(format!("N must be at least 2, got {n}")));
    }
    if a.a.len() != n {
        return Err(Error::BadLength { expected: n, got: a.a.len() });
    }
    Ok(TrigPolyOnInterval { n, a: a.a.clone() })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NormErrors {
    pub l1: f64,
    pub l1eps: f64,
    pub linf: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IntervalNorms {
    pub n: usize,
    pub eps: f64,
    pub grid_points: u64,
    pub l1: f64,
    pub l1eps: f64,
    pub linf: f64,
    /// `int |g|^2`, which equals `N^2/2` exactly on any admissible grid.
    pub l2_squared: f64,
    pub error_bound: NormErrors,
}

pub fn default_grid(n: usize) -> u64 {
    16 * (n as u64) * (n as u64)
}

fn round_grid(n: usize, grid: u64) -> u64 {
    let step = 4 * n as u64;
    grid.div_ceil(step) * step
}

#[derive(Clone, Copy, Default)]
struct Sums {
    s1: f64,
    sr: f64,
    s2: f64,
    max: f64,
}

/// Sums of `|P|`, `|P|^r`, `|P|^2` and `max |P|` over the midpoints
/// `v_i = (i + 1/2)/M` of one period of `P(v) = sum_k a_{k+1} e^{-2 pi i k v}`.
fn period_sums(a: &[i8], m: u64, r: f64) -> Sums {
    const CHUNK: u64 = 16;
    let n = a.len();
    let t = m / n as u64;
    let two_m = 2 * m;
    let fft = FftPlanner::<f64>::new().plan_fft_forward(n);
    let chunks = t.div_ceil(CHUNK);
    let partial: Vec<Sums> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut buf = vec![Complex64::new(0.0, 0.0); n];
            let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
            let mut acc = Sums::default();
            for row in c * CHUNK..((c + 1) * CHUNK).min(t) {
                let odd = 2 * row + 1;
                for (k, (b, &ak)) in buf.iter_mut().zip(a).enumerate() {
                    let phase = (k as u64 * odd) % two_m;
                    *b = Complex64::from_polar(ak as f64, -PI * phase as f64 / m as f64);
                }
                fft.process_with_scratch(&mut buf, &mut scratch);
                for z in &buf {
                    let sq = z.norm_sqr();
                    let abs = sq.sqrt();
                    acc.s1 += abs;
                    acc.sr += sq.powf(r / 2.0);
                    acc.s2 += sq;
                    acc.max = acc.max.max(abs);
                }
            }
            acc
        })
        .collect();
    partial.iter().fold(Sums::default(), |a, b| Sums { s1: a.s1 + b.s1, sr: a.sr + b.sr, s2: a.s2 + b.s2, max: a.max.max(b.max) })
}

/// Composite-midpoint norms of `g` on a uniform grid of `grid_points` cells
/// (rounded up to a multiple of `4N`).
pub fn interval_norms(g: &TrigPolyOnInterval, eps: f64, grid_points: u64) -> Result<IntervalNorms> {
    let n = g.n;
    if !(eps > 0.0) {
        return Err(Error::Domain(format!("eps must be positive, got {eps}")));
    }
    if grid_points < default_grid(n) {
        return Err(Error::Precondition(format!("grid of {grid_points} points is below 16 N^2 = {}", default_grid(n))));
    }
    let grid = round_grid(n, grid_points);
    let m = grid / 4;
    let r = 1.0 + eps;
    let s = period_sums(&g.a, m, r);
    let half = n as f64 / 2.0;
    let scale = 2.0 / n as f64 / m as f64;
    let l1 = scale * half * s.s1;
    let ir = scale * half.powf(r) * s.sr;
    let l1eps = ir.powf(1.0 / r);
    let linf = half * s.max;
    let l2_squared = scale * half * half * s.s2;

    let h = 2.0 / n as f64 / grid as f64;
    let lip = g.lipschitz();
    let e1 = lip * h / (2.0 * n as f64);
    let einf = lip * h / 2.0;
    let top = (linf + einf).min(g.sup_bound());
    let er = r * top.powf(eps) * e1;
    let eleps = if er < ir { (ir - er).powf(1.0 / r - 1.0) * er / r } else { f64::INFINITY };
    let norms = IntervalNorms { n, eps, grid_points: grid, l1, l1eps, linf, l2_squared, error_bound: NormErrors { l1: e1, l1eps: eleps, linf: einf } };
    for (err, norm) in [(e1, l1), (eleps, l1eps), (einf, linf)] {
        if !(err <= MAX_RELATIVE_ERROR * norm) {
            return Err(Error::GridTooCoarse { grid_points: grid, error_bound: err, norm });
        }
    }
    Ok(norms)
}

/// `interval_norms` starting at `16 N^2` and doubling the grid until the
/// error bound is below one percent.
pub fn interval_norms_auto(g: &TrigPolyOnInterval, eps: f64) -> Result<IntervalNorms> {
    let mut grid = default_grid(g.n);
    loop {
        match interval_norms(g, eps, grid) {
            Err(Error::GridTooCoarse { .. }) if grid < 1024 * default_grid(g.n) => grid *= 2,
            other => return other,
        }
    }
}

pub fn l1_threshold(n: usize, eps: f64) -> f64 {
    let n = n as f64;
    (L1_CONSTANT + eps) * (n * n.ln()).sqrt()
}

pub fn l1eps_threshold(n: usize, eps: f64, c1: f64) -> f64 {
    c1 * (n as f64).powf(0.5 + eps / 2.0)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SearchOutcome {
    pub n: usize,
    pub eps: f64,
    pub c1: f64,
    pub signs: SignVector,
    pub norms: IntervalNorms,
    pub trials_used: usize,
    pub l1_threshold: f64,
    pub l1eps_threshold: f64,
    pub passed: bool,
    /// Verdict recomputed on twice the grid.
    pub stable_at_double_grid: bool,
}

fn margin(o: &IntervalNorms, l1_thr: f64, leps_thr: f64) -> f64 {
    (l1_thr / o.l1).min(o.l1eps / leps_thr)
}

/// First sampled sign vector with `||g||_1 <= (10 + eps) sqrt(N log N)` and
/// `||g||_{1+eps} >= c1 N^{1/2 + eps/2}`.
pub fn search_good_signs(n: usize, eps: f64, max_trials: usize, seed: u64, c1: f64) -> Result<SearchOutcome> {
    if n < 16 {
        return Err(Error::Precondition(format!("N must be at least 16, got {n}")));
    }
    let l1_thr = l1_threshold(n, eps);
    let leps_thr = l1eps_threshold(n, eps, c1);
    let passes = |o: &IntervalNorms| o.l1 <= l1_thr && o.l1eps >= leps_thr;
    let mut best: Option<SearchOutcome> = None;
    for trial in 0..max_trials {
        let signs = SignVector::random(n, seed, trial as u64);
        let g = build_fourier_side(n, &signs)?;
        let norms = interval_norms_auto(&g, eps)?;
        let outcome = SearchOutcome {
            n,
            eps,
            c1,
            signs,
            norms: norms.clone(),
            trials_used: trial + 1,
            l1_threshold: l1_thr,
            l1eps_threshold: leps_thr,
            passed: passes(&norms),
            stable_at_double_grid: false,
        };
        if outcome.passed {
            let again = interval_norms(&g, eps, 2 * norms.grid_points)?;
            return Ok(SearchOutcome { stable_at_double_grid: passes(&again), ..outcome });
        }
        if best.as_ref().is_none_or(|b| margin(&norms, l1_thr, leps_thr) > margin(&b.norms, l1_thr, leps_thr)) {
            best = Some(outcome);
        }
    }
    match best {
        Some(b) => Err(Error::SearchExhausted { trials: max_trials, best: Box::new(b) }),
        None => Err(Error::Precondition("max_trials must be positive".into())),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BernsteinReport {
    pub n: usize,
    pub s_multiplier: f64,
    pub s: f64,
    pub trials: usize,
    pub seed: u64,
    /// Sampled `t = m / N^4`, given by `m`; the first is always `0`.
    pub t_numerators: Vec<i64>,
    pub tails: Vec<f64>,
    pub max_tail: f64,
    pub bound: f64,
    pub sigma: f64,
    pub slack: f64,
    pub holds: bool,
    /// Exact `P(|sum a_j| >= s)` for comparison with `tails[0]`.
    pub t0_exact_tail: f64,
}

/// `P(|X| >= s)` for `X` a sum of `n` Rademacher signs.
pub fn rademacher_tail(n: usize, s: f64) -> f64 {
    let mut log_c = 0.0f64;
    let mut p = 0.0;
    let ln2n = n as f64 * 2f64.ln();
    for k in 0..=n {
        if k > 0 {
            log_c += ((n - k + 1) as f64).ln() - (k as f64).ln();
        }
        if ((2 * k) as f64 - n as f64).abs() >= s {
            p += (log_c - ln2n).exp();
        }
    }
    p
}

/// Empirical `P(|X_{N,t}| >= s)` with `s = s_multiplier sqrt(N log N)` for
/// `t` on the grid `m / N^4`, `|m| <= N^3`, against `4 exp(-s^2 / 4N)`.
pub fn bernstein_mc(n: usize, s_multiplier: f64, t_count: usize, trials: usize, seed: u64) -> Result<BernsteinReport> {
    const CHUNK: usize = 256;
    if trials < 1000 {
        return Err(Error::Precondition(format!("need at least 1000 trials, got {trials}")));
    }
    if n < 2 || t_count == 0 || !(s_multiplier >= 0.0) {
        return Err(Error::Precondition("need N >= 2, t_count >= 1 and s_multiplier >= 0".into()));
    }
    let nn = n as i128;
    let n4 = nn.pow(4);
    let n3 = nn.pow(3) as i64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ms = vec![0i64];
    ms.extend((1..t_count).map(|_| rng.random_range(-n3..=n3)));
    let phases: Vec<Vec<Complex64>> = ms
        .iter()
        .map(|&m| {
            (1..=n)
                .map(|j| {
                    let r = (node(n, j) as i128 * m as i128).rem_euclid(n4);
                    Complex64::from_polar(1.0, -2.0 * PI * r as f64 / n4 as f64)
                })
                .collect()
        })
        .collect();
    let s = s_multiplier * (n as f64 * (n as f64).ln()).sqrt();
    let chunks = trials.div_ceil(CHUNK);
    let hits: Vec<Vec<u64>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(1 + c as u64);
            let mut hits = vec![0u64; ms.len()];
            let mut a = vec![0.0f64; n];
            for _ in c * CHUNK..((c + 1) * CHUNK).min(trials) {
                for x in a.iter_mut() {
                    *x = if rng.random::<bool>() { 1.0 } else { -1.0 };
                }
                for (h, ph) in hits.iter_mut().zip(&phases) {
                    let x: Complex64 = ph.iter().zip(&a).map(|(z, &s)| z * s).sum();
                    if x.norm() >= s {
                        *h += 1;
                    }
                }
            }
            hits
        })
        .collect();
    let tails: Vec<f64> = (0..ms.len()).map(|i| hits.iter().map(|h| h[i]).sum::<u64>() as f64 / trials as f64).collect();
    let max_tail = tails.iter().cloned().fold(0.0, f64::max);
    let bound = 4.0 * (-s * s / (4.0 * n as f64)).exp();
    let pb = bound.min(1.0);
    let sigma = (pb * (1.0 - pb) / trials as f64).sqrt();
    let slack = 3.0 * sigma;
    Ok(BernsteinReport {
        n,
        s_multiplier,
        s,
        trials,
        seed,
        t_numerators: ms,
        max_tail,
        holds: tails.iter().all(|&t| t <= bound + slack),
        tails,
        bound,
        sigma,
        slack,
        t0_exact_tail: rademacher_tail(n, s),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScalingRow {
    pub n: usize,
    pub trials_used: usize,
    pub l1: f64,
    pub l1eps: f64,
    pub linf: f64,
    pub grid_points: u64,
    pub error_bound: NormErrors,
    /// `||g||_1 / sqrt(N log N)`.
    pub l1_ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProxyTerm {
    pub l: u32,
    pub w: usize,
    /// `||F(H_l)||_{1+eps}` with `H_l = h_w / (sqrt(w) log(w) l^2)`.
    pub norm_l1: f64,
    pub norm_l1eps: f64,
    /// `4 ||sum_{j<l} F(H_j)||_{1+eps}` bounded by the triangle inequality.
    pub four_times_partial: f64,
    pub ratio_holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PartialSumProxy {
    pub scaled: bool,
    pub schedule: String,
    pub terms: Vec<ProxyTerm>,
    pub l1_sum: f64,
    pub monotone_growth: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScalingReport {
    pub eps: f64,
    pub seed: u64,
    pub rows: Vec<ScalingRow>,
    pub slope: f64,
    pub slope_window: (f64, f64),
    pub slope_in_window: bool,
    pub max_l1_ratio: f64,
    pub l1_bounded: bool,
    /// `min ||g||_{1+eps} / N^{1/2 + eps/2}` over the rows.
    pub c1_empirical: f64,
    pub proxy: PartialSumProxy,
}

pub const SLOPE_TOLERANCE: f64 = 0.08;
pub const L1_RATIO_CAP: f64 = 10.5;

pub fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Terms of `sum_l F(H_l)` on the schedule `w(l) = 2^(2 * 2^l)` for
/// `l = 1, 2` (`w = 16, 256`); the next term needs `w = 65536`.
pub fn partial_sum_proxy(eps: f64, seed: u64, max_trials: usize) -> Result<PartialSumProxy> {
    let mut terms = Vec::new();
    let mut partial = 0.0;
    let mut l1_sum = 0.0;
    for l in 1..=2u32 {
        let w = 1usize << (2u32 << l);
        let found = search_good_signs(w, eps, max_trials, seed, DEFAULT_C1)?;
        let scale = (w as f64).sqrt() * (w as f64).ln() * (l * l) as f64;
        let norm_l1 = found.norms.l1 / scale;
        let norm_l1eps = found.norms.l1eps / scale;
        terms.push(ProxyTerm { l, w, norm_l1, norm_l1eps, four_times_partial: 4.0 * partial, ratio_holds: norm_l1eps > 4.0 * partial });
        partial += norm_l1eps;
        l1_sum += norm_l1;
    }
    let monotone_growth = terms.windows(2).all(|t| t[1].norm_l1eps >= 4.0 * t[0].norm_l1eps);
    Ok(PartialSumProxy { scaled: true, schedule: "SCALED w(l) = 2^(2*2^l)".into(), terms, l1_sum, monotone_growth })
}

pub fn scaling_study(n_list: &[usize], eps: f64, seed: u64, max_trials: usize) -> Result<ScalingReport> {
    if n_list.len() < 2 {
        return Err(Error::Precondition("need at least two values of N".into()));
    }
    if n_list.iter().any(|&n| n < 64 || !n.is_power_of_two()) || n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Precondition(format!("N list must be ascending powers of two >= 64: {n_list:?}")));
    }
    let mut rows = Vec::new();
    for &n in n_list {
        let o = search_good_signs(n, eps, max_trials, seed, DEFAULT_C1)?;
        let nf = n as f64;
        rows.push(ScalingRow {
            n,
            trials_used: o.trials_used,
            l1: o.norms.l1,
            l1eps: o.norms.l1eps,
            linf: o.norms.linf,
            grid_points: o.norms.grid_points,
            error_bound: o.norms.error_bound,
            l1_ratio: o.norms.l1 / (nf * nf.ln()).sqrt(),
        });
    }
    let xs: Vec<f64> = rows.iter().map(|r| (r.n as f64).ln()).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.l1eps.ln()).collect();
    let slope = least_squares_slope(&xs, &ys);
    let slope_window = (0.5 + eps / 2.0 - SLOPE_TOLERANCE, 0.5 + eps + SLOPE_TOLERANCE);
    let max_l1_ratio = rows.iter().map(|r| r.l1_ratio).fold(0.0, f64::max);
    let c1_empirical = rows.iter().map(|r| r.l1eps / (r.n as f64).powf(0.5 + eps / 2.0)).fold(f64::INFINITY, f64::min);
    Ok(ScalingReport {
        eps,
        seed,
        slope,
        slope_window,
        slope_in_window: slope_window.0 <= slope && slope <= slope_window.1,
        max_l1_ratio,
        l1_bounded: max_l1_ratio <= L1_RATIO_CAP,
        c1_empirical,
        rows,
        proxy: partial_sum_proxy(eps, seed, max_trials)?,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TailCheck {
    pub samples: usize,
    /// Largest `|h(x)| (|x| - N^2) / N^2` over samples with `|x| > N^2`.
    pub worst_ratio: f64,
    /// Largest `|h(x)|` over samples with `|x| <= N^2`.
    pub sup_sampled: f64,
    pub holds: bool,
}

/// Samples `h_{N,a}` inside and outside `[-N^2, N^2]` and checks
/// `|h(x)| <= N^2 / (|x| - N^2)` on the outside.
pub fn space_tail_check(g: &TrigPolyOnInterval, samples: usize, seed: u64) -> TailCheck {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n2 = (g.n * g.n) as f64;
    let (mut worst_ratio, mut sup_sampled) = (0.0f64, 0.0f64);
    for _ in 0..samples {
        let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
        let x = sign * n2 * (1.0 + 10f64.powf(rng.random_range(-3.0..3.0)));
        worst_ratio = worst_ratio.max(g.space_value(x).abs() * (x.abs() - n2) / n2);
        let y = rng.random_range(-n2..=n2);
        sup_sampled = sup_sampled.max(g.space_value(y).abs());
    }
    TailCheck { samples, worst_ratio, sup_sampled, holds: worst_ratio <= 1.0 }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(n: usize, seed: u64) -> TrigPolyOnInterval {
        build_fourier_side(n, &SignVector::random(n, seed, 0)).unwrap()
    }

    /// Plain midpoint quadrature by direct evaluation.
    fn brute_norms(g: &TrigPolyOnInterval, r: f64, grid: usize) -> (f64, f64, f64) {
        let h = 2.0 / g.n as f64 / grid as f64;
        let (mut s1, mut sr, mut mx) = (0.0, 0.0, 0.0f64);
        for i in 0..grid {
            let t = -1.0 / g.n as f64 + (i as f64 + 0.5) * h;
            let v = g.value(t).norm();
            s1 += v * h;
            sr += v.powf(r) * h;
            mx = mx.max(v);
        }
        (s1, sr.powf(1.0 / r), mx)
    }

    #[test]
    fn nodes_and_support() {
        let g = build_fourier_side(2, &SignVector::new(vec![1, -1], 0).unwrap()).unwrap();
        assert_eq!(g.nodes(), vec![-2, 2]);
        let g = poly(8, 3);
        assert_eq!(g.nodes(), vec![-56, -40, -24, -8, 8, 24, 40, 56]);
        for t in [0.125 + 1e-12, -0.2, 3.0] {
            assert_eq!(g.value(t), Complex64::new(0.0, 0.0));
        }
        assert!(g.value(0.1).norm() > 0.0);
        assert!(matches!(build_fourier_side(4, &SignVector::ones(3).unwrap()), Err(Error::BadLength { expected: 4, got: 3 })));
        assert!(SignVector::new(vec![1, 0], 0).is_err());
    }

    #[test]
    fn fft_quadrature_matches_direct_evaluation() {
        for (n, seed) in [(16, 1), (32, 2), (16, 7)] {
            let g = poly(n, seed);
            let grid = 256 * (n * n) as u64;
            let fast = interval_norms(&g, 0.5, grid).unwrap();
            let (l1, leps, mx) = brute_norms(&g, 1.5, grid as usize);
            assert!((fast.l1 - l1).abs() < 1e-9 * l1);
            assert!((fast.l1eps - leps).abs() < 1e-9 * leps);
            assert!((fast.linf - mx).abs() < 1e-9 * mx);
        }
    }

    #[test]
    fn sup_bound_and_parseval() {
        for (n, seed) in [(16, 0), (64, 1), (128, 2)] {
            let g = poly(n, seed);
            let o = interval_norms_auto(&g, 0.25).unwrap();
            assert!(o.linf <= g.sup_bound() && g.sup_bound() <= (n * n) as f64);
            let target = (n * n) as f64 / 2.0;
            assert!((o.l2_squared - target).abs() < 1e-9 * target);
        }
        let ones = build_fourier_side(32, &SignVector::ones(32).unwrap()).unwrap();
        let o = interval_norms(&ones, 0.5, 256 * 32 * 32).unwrap();
        assert!(o.linf <= ones.sup_bound() && o.linf > 0.99 * ones.sup_bound());
    }

    #[test]
    fn doubling_the_grid_stays_within_the_error_bound() {
        let g = poly(64, 5);
        let a = interval_norms_auto(&g, 0.25).unwrap();
        let b = interval_norms(&g, 0.25, 2 * a.grid_points).unwrap();
        assert!((a.l1 - b.l1).abs() <= a.error_bound.l1);
        assert!((a.l1eps - b.l1eps).abs() <= a.error_bound.l1eps);
        assert!((a.linf - b.linf).abs() <= a.error_bound.linf);
    }

    #[test]
    fn coarse_grids_are_rejected() {
        let ones = build_fourier_side(64, &SignVector::ones(64).unwrap()).unwrap();
        assert!(matches!(interval_norms(&ones, 0.25, default_grid(64)), Err(Error::GridTooCoarse { .. })));
        assert!(matches!(interval_norms(&ones, 0.25, 100), Err(Error::Precondition(_))));
    }

    #[test]
    fn all_ones_is_a_dirichlet_kernel() {
        // |g| = (N/2)|D_N|, so ||g||_1 = int_0^1 |D_N| ~ (4/pi^2) log N
        let n = 256;
        let g = build_fourier_side(n, &SignVector::ones(n).unwrap()).unwrap();
        let o = interval_norms_auto(&g, 0.25).unwrap();
        let ln = (n as f64).ln();
        assert!(o.l1 > 4.0 / (PI * PI) * ln && o.l1 < 4.0 / (PI * PI) * ln + 2.0, "{}", o.l1);
        let random = interval_norms_auto(&poly(n, 1), 0.25).unwrap();
        assert!(o.l1 < random.l1);
        assert!(o.linf > random.linf);
    }

    #[test]
    fn random_signs_satisfy_the_l1_bound() {
        let n = 64;
        let thr = l1_threshold(n, 0.25);
        let fails = (0..100).filter(|&s| interval_norms_auto(&poly(n, s), 0.25).unwrap().l1 >= thr).count();
        assert!(fails as f64 / 100.0 <= 8.0 * (n as f64).powf(-1.5));
    }

    #[test]
    fn search_examples() {
        let o = search_good_signs(64, 0.25, 200, 11, DEFAULT_C1).unwrap();
        assert!(o.passed && o.stable_at_double_grid);
        assert!(o.trials_used <= 3);
        assert!(matches!(search_good_signs(8, 0.25, 200, 11, DEFAULT_C1), Err(Error::Precondition(_))));
        match search_good_signs(64, 0.25, 3, 11, 1e6) {
            Err(Error::SearchExhausted { trials, best }) => {
                assert_eq!(trials, 3);
                assert!(!best.passed);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rademacher_tail_is_exact() {
        // sums of 4 signs: values -4,-2,0,2,4 with weights 1,4,6,4,1
        for (s, p) in [(3.0, 2.0 / 16.0), (2.0, 10.0 / 16.0), (0.0, 1.0)] {
            assert!((rademacher_tail(4, s) - p).abs() < 1e-15);
        }
    }

    #[test]
    fn bernstein_examples() {
        let r = bernstein_mc(64, 0.3, 4, 4000, 9).unwrap();
        assert_eq!(r.t_numerators[0], 0);
        let sd = (r.t0_exact_tail * (1.0 - r.t0_exact_tail) / r.trials as f64).sqrt();
        assert!((r.tails[0] - r.t0_exact_tail).abs() <= 4.0 * sd, "{} vs {}", r.tails[0], r.t0_exact_tail);
        assert!(r.holds);
        let r = bernstein_mc(64, 1e3, 4, 1000, 9).unwrap();
        assert_eq!(r.max_tail, 0.0);
        assert!(matches!(bernstein_mc(64, 1.0, 4, 999, 9), Err(Error::Precondition(_))));
    }

    #[test]
    fn space_side_tail_bound() {
        let g = poly(32, 4);
        let c = space_tail_check(&g, 200, 1);
        assert!(c.holds, "{c:?}");
        // h(n_j) = a_j + sum of the other sincs, which vanish at multiples of N/2
        assert!((g.space_value(g.nodes()[3] as f64) - g.a[3] as f64).abs() < 1e-9);
    }

    #[test]
    fn slope_fit() {
        let xs = [1.0, 2.0, 3.0];
        assert!((least_squares_slope(&xs, &[2.0, 4.5, 7.0]) - 2.5).abs() < 1e-12);
    }

    #[test]
    fn scaling_preconditions() {
        assert!(matches!(scaling_study(&[64, 96], 0.5, 0, 10), Err(Error::Precondition(_))));
        assert!(matches!(scaling_study(&[128, 64], 0.5, 0, 10), Err(Error::Precondition(_))));
        assert!(matches!(scaling_study(&[32, 64], 0.5, 0, 10), Err(Error::Precondition(_))));
    }

    #[test]
    fn small_scaling_study() {
        let r = scaling_study(&[64, 128, 256, 512], 0.5, 3, 200).unwrap();
        assert!(r.slope_in_window, "{}", r.slope);
        assert!(r.l1_bounded);
        assert!(r.proxy.scaled);
        assert_eq!(r.proxy.terms.iter().map(|t| t.w).collect::<Vec<_>>(), vec![16, 256]);
    }
}
