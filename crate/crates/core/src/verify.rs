//! The full invariant suite run by `ddstc verify`.

use std::fmt;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::{
    center_generators, conjugate_linkers_with, AlgebraElement, BasisMonomial, LinkerFamily,
    RepContext,
};
use crate::design::{
    build_design, build_design_algebraic, group_partition, verify_group_decodable,
};
use crate::error::Result;
use crate::linalg::{adjoint_exact, conj_exact, exact_identity};
use crate::relays::{build_relay_matrices_with, initial_state, verify_conditions};
use crate::signal_sets::{build_axis_signal_set, build_codebook, UNITARITY_TOL};
use crate::simulator::{
    decode_exhaustive, decode_groupwise, differential_encode, ChannelRealization, PowerAllocation,
    RelayNetwork,
};

/// Largest R for which codebook-level checks enumerate the full codebook.
pub const MAX_CODEBOOK_RELAYS: usize = 16;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    Fail,
    Skip,
}

#[derive(Clone, Debug)]
pub struct Check {
    pub name: &'static str,
    pub outcome: Outcome,
    pub detail: String,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.outcome {
            Outcome::Pass => "PASS",
            Outcome::Fail => "FAIL",
            Outcome::Skip => "SKIP",
        };
        write!(f, "{tag} {:<28} {}", self.name, self.detail)
    }
}

#[derive(Clone, Debug)]
pub struct VerifyOptions {
    pub relays: usize,
    pub trials: usize,
    pub seed: u64,
    pub amplitudes: Vec<f64>,
    pub linkers: LinkerFamily,
    /// Swap the first conjugating relay for φ(δ1). Negative control.
    pub corrupt_relay: bool,
}

impl VerifyOptions {
    pub fn new(relays: usize) -> Self {
        Self {
            relays,
            trials: 1000,
            seed: 0,
            amplitudes: vec![1.0],
            linkers: LinkerFamily::Gamma2,
            corrupt_relay: false,
        }
    }
}

fn random_element(rng: &mut ChaCha8Rng, a: u32) -> AlgebraElement {
    AlgebraElement::from_terms(BasisMonomial::all(a).map(|m| (rng.random_range(-4..=4), m)))
}

fn check(name: &'static str, ok: bool, pass: String, fail: impl FnOnce() -> String) -> Check {
    if ok {
        Check {
            name,
            outcome: Outcome::Pass,
            detail: pass,
        }
    } else {
        Check {
            name,
            outcome: Outcome::Fail,
            detail: fail(),
        }
    }
}

pub fn run_suite(opts: &VerifyOptions) -> Result<Vec<Check>> {
    let ctx = RepContext::for_relays(opts.relays)?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut out = Vec::new();
    let n = ctx.relays();
    let a = ctx.a();
    let trials = opts.trials;

    // φ homomorphism.
    let mut witness = None;
    for _ in 0..trials {
        let x = random_element(&mut rng, a);
        let y = random_element(&mut rng, a);
        let px = ctx.left_regular_rep(&x)?;
        let py = ctx.left_regular_rep(&y)?;
        if ctx.left_regular_rep(&(&x * &y))? != &px * &py
            || ctx.left_regular_rep(&(&x + &y))? != &px + &py
        {
            witness = Some((x, y));
            break;
        }
    }
    out.push(check(
        "homomorphism",
        witness.is_none(),
        format!("φ(xy)=φ(x)φ(y), φ(x+y)=φ(x)+φ(y) on {trials} pairs"),
        || {
            let (x, y) = witness.clone().unwrap();
            format!("x = {x}, y = {y}")
        },
    ));

    let bad_mono = BasisMonomial::all(a).find(|m| {
        let p = ctx.left_regular_rep(&(*m).into()).expect("in range");
        &p * adjoint_exact(&p) != exact_identity(n)
    });
    out.push(check(
        "monomial unitarity",
        bad_mono.is_none(),
        format!("{} monomials", 1 << (2 + a)),
        || format!("φ({}) is not unitary", bad_mono.unwrap()),
    ));

    let mut sigma_bad = None;
    let mut center_bad = None;
    let mut linker_bad = None;
    let centers = center_generators(&ctx);
    let linkers = conjugate_linkers_with(&ctx, opts.linkers);
    let linker_mats: Vec<_> = linkers
        .iter()
        .map(|l| ctx.left_regular_rep(l))
        .collect::<Result<_>>()?;
    for _ in 0..trials {
        let x = random_element(&mut rng, a);
        if sigma_bad.is_none() && x.sigma().sigma() != x {
            sigma_bad = Some(x.clone());
        }
        if center_bad.is_none() {
            if let Some(c) = centers.iter().find(|c| (*c * &x) != (&x * *c)) {
                center_bad = Some((c.clone(), x.clone()));
            }
        }
        if linker_bad.is_none() {
            let px = ctx.left_regular_rep(&x)?;
            let sx = x.sigma();
            for (l, pl) in linkers.iter().zip(&linker_mats) {
                if l * &sx != &x * l || pl * conj_exact(&px) != &px * pl {
                    linker_bad = Some((l.clone(), x.clone()));
                    break;
                }
            }
        }
    }
    out.push(check(
        "sigma involution",
        sigma_bad.is_none(),
        format!("{trials} elements"),
        || format!("x = {}", sigma_bad.clone().unwrap()),
    ));
    out.push(check(
        "center commutation",
        center_bad.is_none(),
        format!("{} generators × {trials} elements", centers.len()),
        || {
            let (c, x) = center_bad.clone().unwrap();
            format!("c = {c}, x = {x}")
        },
    ));
    out.push(check(
        "linker identity",
        linker_bad.is_none(),
        format!(
            "ℓσ(x) = xℓ and φ(ℓ)φ(x)* = φ(x)φ(ℓ), {} linkers × {trials} elements",
            linkers.len()
        ),
        || {
            let (l, x) = linker_bad.clone().unwrap();
            format!("ℓ = {l}, x = {x}")
        },
    ));

    let design = build_design(n)?;
    let same = build_design_algebraic(&ctx) == design;
    out.push(check(
        "algebraic design",
        same,
        "relay-assembled design equals the XOR-block design".into(),
        || "weight matrices differ".into(),
    ));

    let mut rs = build_relay_matrices_with(&ctx, opts.linkers);
    if opts.corrupt_relay {
        let delta1 = ctx.left_regular_rep(&BasisMonomial::delta(1).into())?;
        rs = rs.with_replaced(rs.split(), delta1);
    }
    let report = verify_conditions(&rs, &design, trials, opts.seed)?;
    out.push(check(
        "relay commutation",
        report.passed(),
        format!("{} exact checks", report.checks),
        || {
            let v = &report.violations[0];
            let rel = if v.conjugating {
                "A_i S(x)* ≠ S(x) A_i"
            } else {
                "A_i S(x) ≠ S(x) A_i"
            };
            format!("relay {}: {rel} at x = {:?}", v.relay, v.witness)
        },
    ));

    let init = initial_state(&rs);
    out.push(check(
        "initial matrix",
        init.is_ok(),
        "s0 = e1, X0^H X0 = I".into(),
        || "X0 is not unitary".into(),
    ));

    if n > MAX_CODEBOOK_RELAYS {
        for name in ["group decodability", "scaled unitarity", "decoder oracle"] {
            out.push(Check {
                name,
                outcome: Outcome::Skip,
                detail: format!("codebook enumeration limited to R ≤ {MAX_CODEBOOK_RELAYS}"),
            });
        }
        return Ok(out);
    }

    let partition = group_partition(n)?;
    let set = build_axis_signal_set(n / 2, &opts.amplitudes, true)?;
    let sets = std::array::from_fn(|_| set.clone());
    let gd = verify_group_decodable(&design, &partition, &sets)?;
    out.push(check(
        "group decodability",
        gd.passed(),
        "S^H S = (Σ x²) I on the signal set".into(),
        || format!("{gd:?}"),
    ));

    let cb = match build_codebook(&design, &partition, &sets) {
        Ok(cb) => cb,
        Err(e) => {
            out.push(Check {
                name: "scaled unitarity",
                outcome: Outcome::Fail,
                detail: e.to_string(),
            });
            return Ok(out);
        }
    };
    let mean = cb.mean_energy();
    out.push(check(
        "scaled unitarity",
        (mean - 1.0).abs() <= UNITARITY_TOL,
        format!("{} codewords, mean a² = {mean}", cb.len()),
        || format!("mean a² = {mean}"),
    ));

    let batch = trials.min(200);
    let net = RelayNetwork::new(&rs, PowerAllocation::from_db(15.0, 0.5, 0.5 / n as f64));
    let mut disagreement = None;
    let mut s = DVector::from_vec(initial_state(&rs).map(|i| i.s0_float()).unwrap_or_default());
    if s.len() == n {
        let ch = ChannelRealization::draw(n, &mut rng);
        let mut y_prev = net.transmit(&s, &ch, &mut rng);
        let mut a_prev = 1.0;
        for _ in 0..batch {
            let k = rng.random_range(0..cb.len());
            s = differential_encode(&cb.matrix(k), a_prev, &s)?;
            let y = net.transmit(&s, &ch, &mut rng);
            let e = decode_exhaustive(&y, &y_prev, a_prev, &cb)?;
            let g = decode_groupwise(&y, &y_prev, a_prev, &cb)?;
            if e.entry != g.entry {
                disagreement = Some((e.entry, g.entry));
                break;
            }
            a_prev = cb.entry(k).scale;
            y_prev = y;
        }
    }
    out.push(check(
        "decoder oracle",
        disagreement.is_none() && s.len() == n,
        format!("groupwise = exhaustive on {batch} noisy instances at 15 dB"),
        || match disagreement {
            Some((e, g)) => format!("exhaustive chose {e}, groupwise chose {g}"),
            None => "no valid initial state".into(),
        },
    ));
    Ok(out)
}
