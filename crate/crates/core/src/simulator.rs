//! Monte Carlo simulation of the two-stage amplify-and-forward relay protocol
//! with differential encoding at the source and noncoherent differential
//! decoding at the destination.
//!
//! Frames are the unit of work. Each frame draws one channel realization,
//! sends s_0, then `frame_cycles - 1` differentially encoded codewords. The
//! random stream of a frame depends only on (seed, frame index), so the
//! aggregate counts are identical for sequential and parallel execution.

use std::io::Write;
use std::time::{Duration, Instant};

use nalgebra::DVector;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::design::GROUPS;
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, CVector};
use crate::parallel::{map_reduce, Execution};
use crate::relays::{initial_state, RelaySet};
use crate::signal_sets::Codebook;

#[derive(
    Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize, clap::ValueEnum,
)]
#[serde(rename_all = "snake_case")]
pub enum DecoderKind {
    /// Metric minimized over every codeword.
    Exhaustive,
    /// Metric split into four independent group minimizations.
    Groupwise,
}

impl DecoderKind {
    pub fn as_str(self) -> &'static str {
        match self {
            DecoderKind::Exhaustive => "exhaustive",
            DecoderKind::Groupwise => "groupwise",
        }
    }
}

#[derive(
    Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize, clap::ValueEnum,
)]
#[serde(rename_all = "snake_case")]
pub enum ScaleTracking {
    /// The decoder is told the true scale of the previous codeword.
    Genie,
    /// The decoder uses the scale of its own previous decision.
    DecisionDirected,
}

impl ScaleTracking {
    pub fn as_str(self) -> &'static str {
        match self {
            ScaleTracking::Genie => "genie",
            ScaleTracking::DecisionDirected => "decision_directed",
        }
    }
}

/// Standard circularly-symmetric complex Gaussian, unit variance.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Source→relay gains f and relay→destination gains g for one frame.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelRealization {
    pub f: Vec<Complex64>,
    pub g: Vec<Complex64>,
}

impl ChannelRealization {
    pub fn draw<R: Rng + ?Sized>(relays: usize, rng: &mut R) -> Self {
        let f = (0..relays).map(|_| complex_gaussian(rng)).collect();
        let g = (0..relays).map(|_| complex_gaussian(rng)).collect();
        Self { f, g }
    }

    /// H = [f_1 g_1 … f_M g_M, f*_{M+1} g_{M+1} … f*_R g_R]^T.
    pub fn collapsed(&self, split: usize) -> CVector {
        CVector::from_iterator(
            self.f.len(),
            self.f.iter().zip(&self.g).enumerate().map(|(j, (f, g))| {
                if j < split {
                    f * g
                } else {
                    f.conj() * g
                }
            }),
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PowerAllocation {
    /// Total power P, linear, relative to unit noise variance.
    pub total: f64,
    pub pi1: f64,
    pub pi2: f64,
}

impl PowerAllocation {
    pub fn from_db(snr_db: f64, pi1: f64, pi2: f64) -> Self {
        Self {
            total: 10f64.powf(snr_db / 10.0),
            pi1,
            pi2,
        }
    }

    /// √(π₁P), applied by the source.
    pub fn source_amplitude(&self) -> f64 {
        (self.pi1 * self.total).sqrt()
    }

    /// √(π₂P / (π₁P + 1)), applied by every relay.
    pub fn relay_gain(&self) -> f64 {
        (self.pi2 * self.total / (self.pi1 * self.total + 1.0)).sqrt()
    }

    /// √(π₁π₂P² / (π₁P + 1)), the end-to-end signal coefficient.
    pub fn end_to_end(&self) -> f64 {
        self.source_amplitude() * self.relay_gain()
    }
}

/// The relays together with the power profile of one operating point.
#[derive(Clone, Debug)]
pub struct RelayNetwork {
    matrices: Vec<CMatrix>,
    split: usize,
    power: PowerAllocation,
    noiseless: bool,
}

impl RelayNetwork {
    pub fn new(rs: &RelaySet, power: PowerAllocation) -> Self {
        Self {
            matrices: rs.float_matrices(),
            split: rs.split(),
            power,
            noiseless: false,
        }
    }

    /// Zeroes every noise source. Debug only.
    pub fn noiseless(mut self, on: bool) -> Self {
        self.noiseless = on;
        self
    }

    pub fn power(&self) -> &PowerAllocation {
        &self.power
    }

    pub fn relays(&self) -> usize {
        self.matrices.len()
    }

    fn noise<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> CVector {
        if self.noiseless {
            CVector::zeros(n)
        } else {
            CVector::from_iterator(n, (0..n).map(|_| complex_gaussian(rng)))
        }
    }

    /// Both stages, relay by relay: r_j = √(π₁P) f_j s + v_j, then
    /// t_j = gain·A_j r_j (or A_j r_j*), and y = Σ g_j t_j + w.
    pub fn transmit<R: Rng + ?Sized>(
        &self,
        s: &CVector,
        ch: &ChannelRealization,
        rng: &mut R,
    ) -> CVector {
        let n = s.len();
        let src = Complex64::new(self.power.source_amplitude(), 0.0);
        let gain = Complex64::new(self.power.relay_gain(), 0.0);
        let mut y = CVector::zeros(n);
        for (j, a) in self.matrices.iter().enumerate() {
            let r = s * (src * ch.f[j]) + self.noise(n, rng);
            let r = if j < self.split {
                r
            } else {
                r.map(|z| z.conj())
            };
            let t = a * r * gain;
            y += t * ch.g[j];
        }
        y + self.noise(n, rng)
    }

    /// X = [A_1 s … A_M s, A_{M+1} s* … A_R s*].
    pub fn assemble(&self, s: &CVector) -> CMatrix {
        let n = s.len();
        let conj = s.map(|z| z.conj());
        let mut x = CMatrix::zeros(n, self.relays());
        for (j, a) in self.matrices.iter().enumerate() {
            let col = if j < self.split { a * s } else { a * &conj };
            x.set_column(j, &col);
        }
        x
    }

    /// Noise-free destination signal in collapsed form, c·X·H.
    pub fn closed_form(&self, s: &CVector, ch: &ChannelRealization) -> CVector {
        self.assemble(s) * ch.collapsed(self.split) * Complex64::new(self.power.end_to_end(), 0.0)
    }

    /// Per-component variance of the destination noise N for fixed g.
    pub fn noise_variance(&self, g: &[Complex64]) -> f64 {
        let gain2 = self.power.relay_gain().powi(2);
        gain2 * g.iter().map(|z| z.norm_sqr()).sum::<f64>() + 1.0
    }
}

/// Free-function form of [`RelayNetwork::transmit`].
pub fn relay_channel<R: Rng + ?Sized>(
    s: &CVector,
    ch: &ChannelRealization,
    rs: &RelaySet,
    power: PowerAllocation,
    rng: &mut R,
) -> CVector {
    RelayNetwork::new(rs, power).transmit(s, ch, rng)
}

/// s_t = U s_{t−1} / a_{t−1}.
pub fn differential_encode(u: &CMatrix, a_prev: f64, s_prev: &CVector) -> Result<CVector> {
    if a_prev.is_nan() || a_prev <= 0.0 {
        return Err(Error::NonPositiveScale(a_prev));
    }
    Ok(u * s_prev / Complex64::new(a_prev, 0.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Decision {
    pub entry: usize,
    pub points: [usize; GROUPS],
    /// Number of metric evaluations performed.
    pub metric_evaluations: usize,
}

/// Metrics closer than this, relative to the received energy, count as ties.
/// Without it, mathematically equal metrics differ by rounding from codeword
/// to codeword and the tie-break becomes arbitrary.
pub const TIE_TOLERANCE: f64 = 1e-12;

fn tie_tolerance(y_t: &CVector, y_prev: &CVector, a_prev: f64, cb: &Codebook) -> f64 {
    let a_max = cb.entries().iter().map(|e| e.scale).fold(0.0, f64::max);
    TIE_TOLERANCE * (y_t.norm_squared() + y_prev.norm_squared() * (a_max / a_prev).powi(2))
}

fn check_scale(a_prev: f64) -> Result<()> {
    if a_prev.is_nan() || a_prev <= 0.0 {
        return Err(Error::NonPositiveScale(a_prev));
    }
    Ok(())
}

/// B_i y_prev for every weight.
fn projections(cb: &Codebook, y_prev: &CVector) -> Vec<CVector> {
    cb.design()
        .float_weights()
        .iter()
        .map(|b| b * y_prev)
        .collect()
}

/// argmin over all codewords of ‖y_t − U y_prev / a_prev‖². Lowest index wins
/// ties (within [`TIE_TOLERANCE`]).
pub fn decode_exhaustive(
    y_t: &CVector,
    y_prev: &CVector,
    a_prev: f64,
    cb: &Codebook,
) -> Result<Decision> {
    check_scale(a_prev)?;
    if cb.is_empty() {
        return Err(Error::EmptyCodebook);
    }
    let proj = projections(cb, y_prev);
    let tol = tie_tolerance(y_t, y_prev, a_prev, cb);
    let inv = 1.0 / a_prev;
    let mut best = (f64::INFINITY, 0usize);
    let mut predicted = CVector::zeros(y_t.len());
    for (k, e) in cb.entries().iter().enumerate() {
        predicted.fill(Complex64::new(0.0, 0.0));
        for (xi, p) in e.x.iter().zip(&proj) {
            if *xi != 0.0 {
                predicted.axpy(Complex64::new(xi * inv, 0.0), p, Complex64::new(1.0, 0.0));
            }
        }
        let metric = (y_t - &predicted).norm_squared();
        if metric < best.0 - tol {
            best = (metric, k);
        }
    }
    Ok(Decision {
        entry: best.1,
        points: cb.entry(best.1).points,
        metric_evaluations: cb.len(),
    })
}

/// Per-group minimization of Σ_{i∈G_k} [−(2/a) x_i Re(y_t^H B_i y_prev) + (‖y_prev‖²/a²) x_i²].
pub fn decode_groupwise(
    y_t: &CVector,
    y_prev: &CVector,
    a_prev: f64,
    cb: &Codebook,
) -> Result<Decision> {
    check_scale(a_prev)?;
    if cb.is_empty() {
        return Err(Error::EmptyCodebook);
    }
    let corr: Vec<f64> = projections(cb, y_prev)
        .iter()
        .map(|p| y_t.dotc(p).re)
        .collect();
    let energy = y_prev.norm_squared();
    let lin = 2.0 / a_prev;
    let quad = energy / (a_prev * a_prev);
    let tol = tie_tolerance(y_t, y_prev, a_prev, cb);
    let mut points = [0usize; GROUPS];
    let mut evaluations = 0;
    for (k, set) in cb.group_sets().iter().enumerate() {
        let vars = cb.partition().group(k);
        let mut best = (f64::INFINITY, 0usize);
        for (pi, point) in set.points().iter().enumerate() {
            let metric: f64 = vars
                .iter()
                .zip(point)
                .map(|(&i, &x)| -lin * x * corr[i] + quad * x * x)
                .sum();
            evaluations += 1;
            if metric < best.0 - tol {
                best = (metric, pi);
            }
        }
        points[k] = best.1;
    }
    let entry = cb
        .index_of(points)
        .ok_or(Error::ExcludedCombination(points))?;
    Ok(Decision {
        entry,
        points,
        metric_evaluations: evaluations,
    })
}

pub fn decode(
    kind: DecoderKind,
    y_t: &CVector,
    y_prev: &CVector,
    a_prev: f64,
    cb: &Codebook,
) -> Result<Decision> {
    match kind {
        DecoderKind::Exhaustive => decode_exhaustive(y_t, y_prev, a_prev, cb),
        DecoderKind::Groupwise => decode_groupwise(y_t, y_prev, a_prev, cb),
    }
}

#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SimConfig {
    pub relays: usize,
    /// Operating points, P in dB relative to unit noise variance.
    pub snr_db: Vec<f64>,
    pub pi1: f64,
    pub pi2: f64,
    /// Codewords per channel realization, counting s_0.
    pub frame_cycles: usize,
    /// Data codewords simulated per operating point.
    pub total_cycles: u64,
    pub seed: u64,
    pub decoder: DecoderKind,
    pub tracking: ScaleTracking,
    /// Zero every noise source. Debug only.
    pub noiseless: bool,
}

impl SimConfig {
    pub const DEFAULT_FRAME_CYCLES: usize = 20;

    /// Defaults: π₁ = 1/2, π₂ = 1/(2R), 20-codeword frames.
    pub fn new(relays: usize) -> Self {
        Self {
            relays,
            snr_db: vec![10.0, 15.0, 20.0, 25.0],
            pi1: 0.5,
            pi2: 0.5 / relays as f64,
            frame_cycles: Self::DEFAULT_FRAME_CYCLES,
            total_cycles: 10_000,
            seed: 0,
            decoder: DecoderKind::Groupwise,
            tracking: ScaleTracking::DecisionDirected,
            noiseless: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        crate::algebra::lambda_for_relays(self.relays)?;
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.to_string()));
        if !(self.pi1 > 0.0 && self.pi1.is_finite()) {
            return bad("pi1 must be positive");
        }
        if !(self.pi2 > 0.0 && self.pi2.is_finite()) {
            return bad("pi2 must be positive");
        }
        if self.frame_cycles < 2 {
            return bad("frame_cycles must be at least 2");
        }
        if self.total_cycles == 0 {
            return bad("total_cycles must be positive");
        }
        if self.snr_db.is_empty() || self.snr_db.iter().any(|s| !s.is_finite()) {
            return bad("snr_db must be a nonempty list of finite values");
        }
        Ok(())
    }

    fn data_per_frame(&self) -> u64 {
        (self.frame_cycles - 1) as u64
    }

    pub fn frames(&self) -> u64 {
        self.total_cycles.div_ceil(self.data_per_frame())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ErrorCounts {
    pub trials: u64,
    pub block_errors: u64,
    pub group_errors: [u64; GROUPS],
}

impl ErrorCounts {
    fn merge(mut self, other: Self) -> Self {
        self.trials += other.trials;
        self.block_errors += other.block_errors;
        for k in 0..GROUPS {
            self.group_errors[k] += other.group_errors[k];
        }
        self
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SnrRecord {
    pub snr_db: f64,
    pub decoder: DecoderKind,
    pub tracking: ScaleTracking,
    pub counts: ErrorCounts,
}

impl SnrRecord {
    pub fn bler(&self) -> f64 {
        self.counts.block_errors as f64 / self.counts.trials as f64
    }

    pub fn group_error_rate(&self, k: usize) -> f64 {
        self.counts.group_errors[k] as f64 / self.counts.trials as f64
    }
}

#[derive(Clone, Debug)]
pub struct SimResult {
    pub records: Vec<SnrRecord>,
    pub runtime: Duration,
}

pub const CSV_HEADER: &str =
    "snr_db,decoder,tracking,trials,block_errors,bler,g1_err,g2_err,g3_err,g4_err,seed";

/// One CSV row per record. `snr_db` is P in dB relative to unit noise variance.
pub fn write_csv<W: Write>(mut w: W, records: &[SnrRecord], seed: u64) -> std::io::Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for r in records {
        let c = &r.counts;
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.snr_db,
            r.decoder.as_str(),
            r.tracking.as_str(),
            c.trials,
            c.block_errors,
            r.bler(),
            c.group_errors[0],
            c.group_errors[1],
            c.group_errors[2],
            c.group_errors[3],
            seed
        )?;
    }
    Ok(())
}

struct FrameContext<'a> {
    cfg: &'a SimConfig,
    cb: &'a Codebook,
    net: RelayNetwork,
    s0: CVector,
}

impl FrameContext<'_> {
    fn run_frame(&self, frame: u64) -> Result<ErrorCounts> {
        let cfg = self.cfg;
        let per_frame = cfg.data_per_frame();
        let trials = per_frame.min(cfg.total_cycles - frame * per_frame);

        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(frame);
        let ch = ChannelRealization::draw(self.net.relays(), &mut rng);

        let mut s = self.s0.clone();
        let mut y_prev = self.net.transmit(&s, &ch, &mut rng);
        // X_0 is unitary, so both trackers start from a_0 = 1.
        let mut a_true = 1.0;
        let mut a_est = 1.0;
        let mut counts = ErrorCounts {
            trials,
            ..Default::default()
        };
        for _ in 0..trials {
            let sent = rng.random_range(0..self.cb.len());
            s = differential_encode(&self.cb.matrix(sent), a_true, &s)?;
            let y = self.net.transmit(&s, &ch, &mut rng);
            let a_dec = match cfg.tracking {
                ScaleTracking::Genie => a_true,
                ScaleTracking::DecisionDirected => a_est,
            };
            let d = decode(cfg.decoder, &y, &y_prev, a_dec, self.cb)?;
            if d.entry != sent {
                counts.block_errors += 1;
                let truth = self.cb.entry(sent).points;
                for (k, (got, want)) in d.points.iter().zip(&truth).enumerate() {
                    if got != want {
                        counts.group_errors[k] += 1;
                    }
                }
            }
            a_true = self.cb.entry(sent).scale;
            a_est = self.cb.entry(d.entry).scale;
            y_prev = y;
        }
        Ok(counts)
    }
}

pub fn run_simulation(cfg: &SimConfig, rs: &RelaySet, cb: &Codebook) -> Result<SimResult> {
    run_simulation_with(cfg, rs, cb, Execution::default())
}

pub fn run_simulation_with(
    cfg: &SimConfig,
    rs: &RelaySet,
    cb: &Codebook,
    exec: Execution,
) -> Result<SimResult> {
    cfg.validate()?;
    if rs.relays() != cfg.relays || cb.relays() != cfg.relays {
        return Err(Error::InvalidConfig(format!(
            "relay count mismatch: config {}, relay set {}, codebook {}",
            cfg.relays,
            rs.relays(),
            cb.relays()
        )));
    }
    let init = initial_state(rs)?;
    let s0 = DVector::from_vec(init.s0_float());
    let start = Instant::now();
    let mut records = Vec::with_capacity(cfg.snr_db.len());
    for &snr in &cfg.snr_db {
        let net = RelayNetwork::new(rs, PowerAllocation::from_db(snr, cfg.pi1, cfg.pi2))
            .noiseless(cfg.noiseless);
        let ctx = FrameContext {
            cfg,
            cb,
            net,
            s0: s0.clone(),
        };
        let counts = map_reduce(
            exec,
            cfg.frames(),
            || Ok(ErrorCounts::default()),
            |f| ctx.run_frame(f),
            |a: Result<ErrorCounts>, b| Ok(a?.merge(b?)),
        )?;
        records.push(SnrRecord {
            snr_db: snr,
            decoder: cfg.decoder,
            tracking: cfg.tracking,
            counts,
        });
    }
    Ok(SimResult {
        records,
        runtime: start.elapsed(),
    })
}
