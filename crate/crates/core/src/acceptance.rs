//! The acceptance suite: nine criteria, each a list of measured-versus-expected checks.
//!
//! Every check carries its own pinned tolerance. [`VerifyOptions::tolerance`] replaces all
//! numerical tolerances at once (runtime limits are never overridden).

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::fmt;
use std::time::{Duration, Instant};

use nalgebra::Matrix4;
use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::analysis::{
    alphas, amplifier_output, fidelity_f2, fidelity_fperp, lambda_for_q, optimal_q, optimal_q_numerical, target_state,
    two_qubit_projectors, AmplifierModel,
};
use crate::circuit::{two_photon_coefficients, two_photon_state, Element};
use crate::error::Result;
use crate::fock::{
    max_amplitude_difference, overlap_magnitude, single_photon_fidelity, FockState, ModeSpace, Occupation, Polarization,
};
use crate::interferometers::{
    build_cloner_stages, build_epr_stage, build_partial_swap, build_partial_symmetrizer, eta_from_q,
    partial_swap_pipeline, product_input, run_cloner, run_partial_symmetrizer, single_photon_cloner, Limits, Qubit,
    DEFAULT_M_CAP,
};
use crate::postselect::postselect;
use crate::scalar::real;
use crate::transform::{apply_element, apply_map, LinearModeMap};

type C64 = Complex<f64>;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VerifyOptions {
    /// Replaces every numerical tolerance when set.
    pub tolerance: Option<f64>,
    pub m_cap: usize,
    /// Seed for the randomized inputs of criteria 8 and 9.
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { tolerance: None, m_cap: DEFAULT_M_CAP, seed: 20_240_917 }
    }
}

impl VerifyOptions {
    fn tol(&self, pinned: f64) -> f64 {
        self.tolerance.unwrap_or(pinned)
    }

    fn limits(&self) -> Limits {
        Limits { m_cap: self.m_cap.max(5) }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub label: String,
    pub measured: f64,
    pub expected: f64,
    pub diff: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    /// `|measured − expected| ≤ tolerance`.
    pub fn close(label: impl Into<String>, measured: f64, expected: f64, tolerance: f64) -> Self {
        let diff = (measured - expected).abs();
        Self { label: label.into(), measured, expected, diff, tolerance, pass: diff <= tolerance }
    }

    /// `measured ≤ limit`, e.g. a residual or a runtime.
    pub fn at_most(label: impl Into<String>, measured: f64, limit: f64) -> Self {
        Self { label: label.into(), measured, expected: 0.0, diff: measured, tolerance: limit, pass: measured <= limit }
    }

    /// A boolean condition, recorded as 1 (true) or 0.
    pub fn holds(label: impl Into<String>, ok: bool) -> Self {
        let measured = if ok { 1.0 } else { 0.0 };
        Self { label: label.into(), measured, expected: 1.0, diff: 1.0 - measured, tolerance: 0.0, pass: ok }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {}: measured {:.16e}, expected {:.16e}, diff {:.3e}, tol {:.1e}",
            if self.pass { "ok  " } else { "FAIL" },
            self.label,
            self.measured,
            self.expected,
            self.diff,
            self.tolerance
        )
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CriterionReport {
    pub id: u8,
    pub title: &'static str,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
    pub elapsed: Duration,
    /// Set when the criterion could not be evaluated at all.
    pub error: Option<String>,
}

impl CriterionReport {
    pub fn pass(&self) -> bool {
        self.error.is_none() && !self.checks.is_empty() && self.checks.iter().all(|c| c.pass)
    }

    /// Largest `diff / tolerance` among numerical checks, for summaries.
    pub fn worst(&self) -> Option<&Check> {
        self.checks.iter().max_by(|a, b| {
            let ra = if a.tolerance > 0.0 { a.diff / a.tolerance } else { a.diff };
            let rb = if b.tolerance > 0.0 { b.diff / b.tolerance } else { b.diff };
            ra.total_cmp(&rb)
        })
    }

    /// One line: `PASS criterion 3 (two-clone state): 15 checks, worst ...`.
    pub fn summary_line(&self) -> String {
        let verdict = if self.pass() { "PASS" } else { "FAIL" };
        let mut line = format!(
            "{verdict} criterion {} ({}): {} checks in {:.2?}",
            self.id,
            self.title,
            self.checks.len(),
            self.elapsed
        );
        if let Some(e) = &self.error {
            line.push_str(&format!("; error: {e}"));
        } else if let Some(w) = self.checks.iter().find(|c| !c.pass).or_else(|| self.worst()) {
            line.push_str(&format!("; {} diff {:.3e} (tol {:.1e})", w.label, w.diff, w.tolerance));
        }
        line
    }
}

impl fmt::Display for CriterionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.summary_line())?;
        for c in &self.checks {
            writeln!(f, "    {c}")?;
        }
        for n in &self.notes {
            writeln!(f, "    note: {n}")?;
        }
        Ok(())
    }
}

pub const TITLES: [&str; 9] = [
    "partial symmetrizer exactness",
    "success probabilities",
    "two-clone state",
    "fidelity curve",
    "optimum",
    "M-clone agreement",
    "amplifier oracle",
    "partial SWAP",
    "structural properties",
];

type Body = fn(&VerifyOptions, &mut Vec<Check>, &mut Vec<String>) -> Result<()>;

fn run_criterion(id: u8, opts: &VerifyOptions, body: Body) -> CriterionReport {
    let start = Instant::now();
    let mut checks = Vec::new();
    let mut notes = Vec::new();
    let error = body(opts, &mut checks, &mut notes).err().map(|e| e.to_string());
    CriterionReport { id, title: TITLES[id as usize - 1], checks, notes, elapsed: start.elapsed(), error }
}

/// Runs one criterion by number (1 to 9).
pub fn criterion(id: u8, opts: &VerifyOptions) -> Option<CriterionReport> {
    let body: Body = match id {
        1 => criterion_1,
        2 => criterion_2,
        3 => criterion_3,
        4 => criterion_4,
        5 => criterion_5,
        6 => criterion_6,
        7 => criterion_7,
        8 => criterion_8,
        9 => criterion_9,
        _ => return None,
    };
    Some(run_criterion(id, opts, body))
}

pub fn verify_all(opts: &VerifyOptions) -> Vec<CriterionReport> {
    (1..=9).filter_map(|id| criterion(id, opts)).collect()
}

fn max_entry_diff(a: &Matrix4<C64>, b: &Matrix4<C64>) -> f64 {
    (a - b).iter().fold(0.0, |m, v| m.max(v.norm()))
}

fn sym_eta() -> f64 {
    (2.0f64 / 3.0).sqrt()
}

fn criterion_1(opts: &VerifyOptions, checks: &mut Vec<Check>, _: &mut Vec<String>) -> Result<()> {
    let start = Instant::now();
    let (plus, minus) = two_qubit_projectors::<f64>();
    let scale = real(1.0 / (2.0 * 2f64.sqrt()));
    for eta in [0.0, 0.3, sym_eta(), 1.0] {
        let map = build_partial_symmetrizer(eta)?.conditional_map()?;
        let expected = (plus + minus * real(eta)) * scale;
        checks.push(Check::close(format!("map(η={eta:.6})"), max_entry_diff(&map, &expected), 0.0, opts.tol(1e-12)));
    }
    checks.push(Check::at_most("runtime [s]", start.elapsed().as_secs_f64(), 1.0));
    Ok(())
}

fn criterion_2(opts: &VerifyOptions, checks: &mut Vec<Check>, notes: &mut Vec<String>) -> Result<()> {
    let tol = opts.tol(1e-12);
    let limits = opts.limits();
    let eta = sym_eta();
    let pair = product_input("A_in", &Qubit::psi(), "B_in", &Qubit::perp())?;
    let p_sym = run_partial_symmetrizer(&pair, eta)?.probability;
    checks.push(Check::close("P_sym", p_sym, 5.0 / 48.0, tol));

    let p_tot = run_cloner(&Qubit::psi(), 2, eta, &limits)?.probability;
    checks.push(Check::close("P_tot (single circuit)", p_tot, 1.0 / 64.0, tol));

    // Reading 1: the EPR stage acts on the renormalized output of the symmetrizer.
    let stages = build_cloner_stages(2, eta, &limits)?;
    let chained = stages.run(&product_input("psi_in", &Qubit::psi(), "perp_in", &Qubit::perp())?)?;
    let p_epr_sym = chained.stage_probabilities[1];
    checks.push(Check::close("P_EPR on symmetrized input", p_epr_sym, 3.0 / 20.0, tol));
    checks.push(Check::close("P_sym · P_EPR", p_sym * p_epr_sym, 1.0 / 64.0, tol));
    checks.push(Check::close("pipeline P_tot", chained.probability, p_tot, tol));

    // Reading 2: the EPR stage fed the raw pair.
    let raw = build_epr_stage::<f64>(2, &limits)?.run(&product_input("C", &Qubit::psi(), "D", &Qubit::perp())?)?;
    let p_epr_raw = raw.probability;
    let reproduces = (p_sym * p_epr_raw - 1.0 / 64.0).abs() <= tol;
    checks.push(Check::holds("raw-pair reading does not factorize 1/64", !reproduces));
    notes.push(format!(
        "P_EPR on the symmetrized pair = {p_epr_sym:.16e} (3/20), P_sym·P_EPR = {:.16e} = 1/64: this factorization holds",
        p_sym * p_epr_sym
    ));
    notes.push(format!(
        "P_EPR on the raw pair = {p_epr_raw:.16e} (5/32), P_sym·P_EPR = {:.16e} ≠ 1/64",
        p_sym * p_epr_raw
    ));
    Ok(())
}

/// Amplitudes of the M = 2 output on `|2,0⟩|0,2⟩`, `|1,1⟩|1,1⟩`, `|0,2⟩|2,0⟩` over `(A_out, B_out)`.
fn two_clone_amplitudes(state: &FockState<f64>) -> Result<[C64; 3]> {
    let k = |a_psi: u16, a_perp: u16| {
        state.amplitude_of(&[
            ("A_out", Polarization::Psi, a_psi),
            ("A_out", Polarization::Perp, a_perp),
            ("B_out", Polarization::Psi, a_perp),
            ("B_out", Polarization::Perp, a_psi),
        ])
    };
    Ok([k(2, 0)?, k(1, 1)?, k(0, 2)?])
}

fn criterion_3(opts: &VerifyOptions, checks: &mut Vec<Check>, _: &mut Vec<String>) -> Result<()> {
    let tol = opts.tol(1e-12);
    for eta in [0.0, 0.25, 0.5, sym_eta(), 1.0] {
        let out = run_cloner(&Qubit::psi(), 2, eta, &opts.limits())?;
        let q = out.q;
        let amps = two_clone_amplitudes(&out.state)?;
        let reference = [2.0, q - 1.0, -2.0 * q];
        let rn = reference.iter().map(|x| x * x).sum::<f64>().sqrt();
        // fix the global phase on the largest reference component
        let lead = (0..3).max_by(|&a, &b| reference[a].abs().total_cmp(&reference[b].abs())).unwrap();
        let phase = amps[lead] / amps[lead].norm() * reference[lead].signum();
        let mut worst = 0.0f64;
        for i in 0..3 {
            worst = worst.max((amps[i] - phase * (reference[i] / rn)).norm());
        }
        let captured: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        worst = worst.max((1.0 - captured).abs());
        checks.push(Check::close(format!("two-clone amplitude ratios (η={eta:.6}, q={q:.6})"), worst, 0.0, tol));
    }
    Ok(())
}

fn criterion_4(opts: &VerifyOptions, checks: &mut Vec<Check>, _: &mut Vec<String>) -> Result<()> {
    let tol = opts.tol(1e-12);
    let mut worst = 0.0f64;
    let mut at_zero = f64::NAN;
    for i in 0..=20 {
        let q = i as f64 / 20.0;
        let f = run_cloner(&Qubit::psi(), 2, eta_from_q(q), &opts.limits())?.fidelity;
        worst = worst.max((f - fidelity_f2(q)).abs());
        if i == 0 {
            at_zero = f;
        }
    }
    checks.push(Check::close("max |F_sim − F(q)| on 21-point grid", worst, 0.0, tol));
    checks.push(Check::close("F(q=0)", at_zero, 0.9, tol));
    Ok(())
}

fn criterion_5(opts: &VerifyOptions, checks: &mut Vec<Check>, _: &mut Vec<String>) -> Result<()> {
    let limits = opts.limits();
    for m in 2..=4 {
        let numerical = optimal_q_numerical::<f64>(m, &limits)?;
        checks.push(Check::close(format!("argmax q (M={m})"), numerical, optimal_q::<f64>(m)?, opts.tol(1e-9)));
    }
    let q2 = optimal_q::<f64>(2)?;
    checks.push(Check::close("q_opt(2) = 5 − 2√6", q2, 5.0 - 2.0 * 6f64.sqrt(), opts.tol(1e-12)));
    let f = run_cloner(&Qubit::psi(), 2, eta_from_q(q2), &limits)?.fidelity;
    checks.push(Check::close("F at optimum", f, 0.5 * (1.0 + sym_eta()), opts.tol(1e-12)));
    Ok(())
}

/// Ms checked by criterion 6: 2 to 5, extended to the cap when it is raised above the default.
pub fn criterion_6_range(m_cap: usize) -> std::ops::RangeInclusive<usize> {
    let top = if m_cap > DEFAULT_M_CAP { m_cap } else { 5 };
    2..=top
}

fn criterion_6(opts: &VerifyOptions, checks: &mut Vec<Check>, _: &mut Vec<String>) -> Result<()> {
    let tol = opts.tol(1e-10);
    let limits = opts.limits();
    for m in criterion_6_range(opts.m_cap) {
        let start = Instant::now();
        let q = optimal_q::<f64>(m)?;
        let out = run_cloner(&Qubit::psi(), m, eta_from_q(q), &limits)?;
        let target = target_state::<f64>(m, &limits)?;
        let sim = out.state.rename_modes(&[("A_out", "A"), ("B_out", "B")])?;
        checks.push(Check::close(
            format!("overlap with target (M={m})"),
            overlap_magnitude(&target.state, &sim)?,
            1.0,
            tol,
        ));
        checks.push(Check::close(format!("fidelity (M={m})"), out.fidelity, fidelity_fperp(m)?, tol));
        if m == 5 {
            checks.push(Check::at_most("runtime at M=5 [s]", start.elapsed().as_secs_f64(), 30.0));
        }
    }
    Ok(())
}

fn criterion_7(opts: &VerifyOptions, checks: &mut Vec<Check>, notes: &mut Vec<String>) -> Result<()> {
    let limits = opts.limits();
    let input = AmplifierModel::<f64>::standard_input();
    for lambda in [0.1, 0.3, 0.5] {
        let model = AmplifierModel::from_lambda(lambda, 12)?;
        let factorized = model.evolve_factorized(&input)?;
        let dense = model.evolve_dense(&input)?;
        let worst = max_amplitude_difference(&factorized, &dense.state)?;
        checks.push(Check::close(format!("factorized vs dense (λ={lambda})"), worst, 0.0, opts.tol(1e-10)));
        notes.push(format!("λ={lambda}: dense oracle converged with {} working photons", dense.working_photons));
        for m in [2, 3] {
            let amp = amplifier_output(&model, m)?;
            checks.push(Check::at_most(
                format!("q-form fit residual (λ={lambda}, M={m})"),
                amp.fit.residual,
                opts.tol(1e-10),
            ));
            let cloner = run_cloner(&Qubit::psi(), m, eta_from_q(amp.fit.q), &limits)?;
            let sim = cloner.state.rename_modes(&[("A_out", "A"), ("B_out", "B")])?;
            checks.push(Check::close(
                format!("cloner vs amplifier overlap (λ={lambda}, M={m}, q={:.6})", amp.fit.q),
                overlap_magnitude(&amp.state, &sim)?,
                1.0,
                opts.tol(1e-9),
            ));
        }
    }
    let q2 = optimal_q::<f64>(2)?;
    let lambda = lambda_for_q(q2, 2)?;
    let amp = amplifier_output(&AmplifierModel::from_lambda(lambda, 4)?, 2)?;
    let f = single_photon_fidelity(&amp.state, "A", Polarization::Psi)?;
    checks.push(Check::close(
        format!("amplifier fidelity at q_opt (λ={lambda:.12})"),
        f,
        0.5 * (1.0 + sym_eta()),
        opts.tol(1e-10),
    ));
    Ok(())
}

fn random_qubit(rng: &mut ChaCha8Rng) -> Qubit<f64> {
    let theta = (1.0 - 2.0 * rng.gen::<f64>()).acos();
    Qubit::from_bloch(theta, 2.0 * PI * rng.gen::<f64>())
}

fn random_two_photon(rng: &mut ChaCha8Rng, a: &str, b: &str) -> Result<FockState<f64>> {
    let coeffs: [C64; 4] = std::array::from_fn(|_| Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    two_photon_state(a, b, &coeffs)?.normalized()
}

fn random_unitary(rng: &mut ChaCha8Rng) -> [[C64; 2]; 2] {
    let u = random_qubit(rng).basis_matrix();
    let phase = Complex::from_polar(1.0, 2.0 * PI * rng.gen::<f64>());
    [[u[0][0] * phase, u[0][1] * phase], [u[1][0] * phase, u[1][1] * phase]]
}

fn kron(u: &[[C64; 2]; 2]) -> Matrix4<C64> {
    Matrix4::from_fn(|r, c| u[r / 2][c / 2] * u[r % 2][c % 2])
}

fn criterion_8(opts: &VerifyOptions, checks: &mut Vec<Check>, _: &mut Vec<String>) -> Result<()> {
    let tol = opts.tol(1e-12);
    let (plus, minus) = two_qubit_projectors::<f64>();
    let scale = real(1.0 / (2.0 * 2f64.sqrt()));
    for (name, phi) in [("0", 0.0), ("π/4", FRAC_PI_4), ("π/2", FRAC_PI_2), ("π", PI)] {
        let map = build_partial_swap(phi)?.conditional_map()?;
        let expected = (plus + minus * Complex::from_polar(1.0, phi)) * scale;
        checks.push(Check::close(format!("U(φ={name})"), max_entry_diff(&map, &expected), 0.0, tol));
    }
    let pipe = partial_swap_pipeline(&[FRAC_PI_2, FRAC_PI_2])?;
    let swap = (plus - minus) * real(0.125);
    checks.push(Check::close("U(π/2)·U(π/2) = SWAP/8", max_entry_diff(&pipe.conditional_map()?, &swap), 0.0, tol));

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut worst = 0.0f64;
    let mut swap_worst = 0.0f64;
    let gate = build_partial_swap(PI)?;
    for _ in 0..10 {
        let phi = 2.0 * PI * rng.gen::<f64>();
        let input = random_two_photon(&mut rng, "A_in", "B_in")?;
        worst = worst.max((build_partial_swap(phi)?.run(&input)?.probability - 0.125).abs());
        let (a, b) = (random_qubit(&mut rng), random_qubit(&mut rng));
        let out = gate.run(&product_input("A_in", &a, "B_in", &b)?)?;
        let expected = product_input("A_out", &b, "B_out", &a)?;
        swap_worst = swap_worst.max((1.0 - overlap_magnitude(&expected, &out.state)?).abs());
    }
    checks.push(Check::close("P = 1/8 on 10 random inputs", worst, 0.0, tol));
    checks.push(Check::close("φ=π swaps 10 random product inputs", swap_worst, 0.0, tol));
    Ok(())
}

/// Symmetrizer with the attenuator replaced by a beam splitter to a loss mode, heralding
/// vacuum in the loss mode. Returns the projected output on `A_out`, `B_out`.
pub fn loss_mode_symmetrizer(input: &FockState<f64>, eta: f64) -> Result<(FockState<f64>, f64)> {
    let circuit = build_partial_symmetrizer(eta)?;
    let mut state = input.clone();
    for el in &circuit.elements {
        let map = match el {
            Element::Attenuator { mode, eta } => {
                let s = (1.0 - eta * eta).sqrt();
                LinearModeMap::spatial(
                    &[mode.as_str(), "loss_vac"],
                    &[mode.as_str(), "loss"],
                    &[vec![real(*eta), real(-s)], vec![real(s), real(*eta)]],
                )?
            }
            other => other.to_map()?,
        };
        state = apply_element(&state, &map)?;
    }
    let ps = postselect(&state, &circuit.pattern.clone().with("loss", 0))?;
    Ok((ps.projected.restrict(&["A_out", "B_out"])?, ps.probability))
}

fn criterion_9(opts: &VerifyOptions, checks: &mut Vec<Check>, _: &mut Vec<String>) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x9e37_79b9);
    let bs = LinearModeMap::<f64>::balanced_beam_splitter("a", "b", "c", "d")?;

    // HOM: symmetric inputs never give a coincidence.
    let mut hom = 0.0f64;
    for _ in 0..10 {
        let qb = random_qubit(&mut rng);
        let same = product_input("a", &qb, "b", &qb)?;
        let out = apply_map(&same, &bs)?;
        let coincidence = out.filter(|o| o.mode_total(0) == 1 && o.mode_total(1) == 1).norm();
        hom = hom.max(coincidence);
    }
    checks.push(Check::close("HOM coincidence amplitude", hom, 0.0, opts.tol(1e-12)));

    let mut alpha_worst = 0.0f64;
    for m in 1..=10 {
        let s: f64 = alphas::<f64>(m)?.iter().map(|a| a * a).sum();
        alpha_worst = alpha_worst.max((s - 1.0).abs());
    }
    checks.push(Check::close("Σα² = 1 for M ≤ 10", alpha_worst, 0.0, opts.tol(1e-12)));

    // Covariance under joint polarization rotations.
    let ctol = opts.tol(1e-10);
    let limits = opts.limits();
    let (mut sym_cov, mut swap_cov, mut clone_cov, mut single_cov) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let base2 = run_cloner(&Qubit::psi(), 2, 0.7, &limits)?;
    let base3 = run_cloner(&Qubit::psi(), 3, 0.7, &limits)?;
    let single = single_photon_cloner(&Qubit::<f64>::psi())?;
    for _ in 0..5 {
        let u = random_unitary(&mut rng);
        let uu = kron(&u);
        let eta = rng.gen::<f64>();
        let map = build_partial_symmetrizer(eta)?.conditional_map()?;
        sym_cov = sym_cov.max(max_entry_diff(&(map * uu), &(uu * map)));
        let phi = 2.0 * PI * rng.gen::<f64>();
        let map = build_partial_swap(phi)?.conditional_map()?;
        swap_cov = swap_cov.max(max_entry_diff(&(map * uu), &(uu * map)));

        let psi = Qubit([u[0][0], u[1][0]]);
        for base in [&base2, &base3] {
            let m = if std::ptr::eq(base, &base2) { 2 } else { 3 };
            let rotated = run_cloner(&psi, m, 0.7, &limits)?;
            clone_cov = clone_cov
                .max((rotated.probability - base.probability).abs())
                .max((rotated.fidelity - base.fidelity).abs())
                .max((rotated.anticlone_fidelity - base.anticlone_fidelity).abs());
        }
        let rotated = single_photon_cloner(&psi)?;
        single_cov = single_cov
            .max((rotated.probability - single.probability).abs())
            .max((rotated.clone_fidelity - single.clone_fidelity).abs());
    }
    checks.push(Check::close("symmetrizer covariance", sym_cov, 0.0, ctol));
    checks.push(Check::close("partial SWAP covariance", swap_cov, 0.0, ctol));
    checks.push(Check::close("cloner covariance (M=2,3)", clone_cov, 0.0, ctol));
    checks.push(Check::close("single-photon cloner covariance", single_cov, 0.0, ctol));

    // Norm preservation of unitary maps on random three-photon states.
    let space = ModeSpace::new(["a", "b"])?;
    let mut norm_worst = 0.0f64;
    for _ in 0..10 {
        let mut terms = Vec::new();
        for i in 0..=3u16 {
            for j in 0..=(3 - i) {
                for k in 0..=(3 - i - j) {
                    let l = 3 - i - j - k;
                    let occ = Occupation::from_counts(vec![i, j, k, l]);
                    terms.push((occ, Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))));
                }
            }
        }
        let state = FockState::from_amplitudes(space.clone(), terms)?.normalized()?;
        let phase = LinearModeMap::phase_shifter("c", rng.gen::<f64>() * 2.0 * PI)?;
        let out = apply_element(&apply_map(&state, &bs)?, &phase)?;
        norm_worst = norm_worst.max((out.norm() - 1.0).abs());
    }
    let network = build_partial_symmetrizer(1.0)?;
    let evolved = network.evolve(&random_two_photon(&mut rng, "A_in", "B_in")?)?;
    norm_worst = norm_worst.max((evolved.norm() - 1.0).abs());
    checks.push(Check::close("unitary maps preserve the norm", norm_worst, 0.0, opts.tol(1e-12)));

    // Attenuator against a beam splitter to a loss mode, heralded on vacuum loss.
    let mut exact = true;
    for eta in [0.0, 0.3, sym_eta(), 1.0] {
        for _ in 0..3 {
            let input = random_two_photon(&mut rng, "A_in", "B_in")?;
            let direct = build_partial_symmetrizer(eta)?.run(&input)?;
            let (lossy, p) = loss_mode_symmetrizer(&input, eta)?;
            let same_state = two_photon_coefficients(&direct.projected, "A_out", "B_out")?
                == two_photon_coefficients(&lossy, "A_out", "B_out")?;
            exact &= same_state && p == direct.probability;
        }
    }
    checks.push(Check::holds("attenuator ≡ loss-mode model (bitwise)", exact));
    Ok(())
}
