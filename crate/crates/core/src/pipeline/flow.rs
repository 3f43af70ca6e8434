use std::f64::consts::TAU;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use serde_json::{json, Value};

use super::config::{grid_values, scalar, scalar_matrix, HbarSpec};
use super::report::{Check, PipelineReport, Step, StepStatus, STEP_NAMES};
use super::{GroupoidSpec, Mode, Module, Outcome, PipelineConfig, PipelineError, ScalarChoice, Tolerances};
use crate::algebra::{
    clock_shift_rep, cstar_identity_check, section_conjugation_check, truncated_regular_rep, CrossedAction,
    CrossedTwist, LatticeAlgebra, LatticeElement, MatrixRep,
};
use crate::deformation::{dyadic_grid, sweep, SweepResult};
use crate::linalg::{same_span, Matrix};
use crate::numfmt::{json_float, scalar_to_json};
use crate::poisson::{jacobi_residual, parse_poisson_spec, poisson_spec_json, ConstantPoisson};
use crate::poly::{OneForm, Polynomial};
use crate::prequant::{
    bs_levels, bs_reduce, check_potential, coboundary_potential, holonomy, holonomy_forced_quadrature, is_adapted,
    reduced_cocycle_from_phi, Bicharacter, BsCase, CoboundaryStatus, Loop, PhaseScale, SymplecticPotential,
    LATTICE_WINDOW_RADIUS,
};
use crate::scalar::{complexify, to_rational, Scalar};
use crate::symplectic::{check_polarization, AbelianActionGroupoid, BaseGrid, LinearSymplecticGroupoid, PolarizationSpec};

/// Window of the truncated regular representation for the Gelfand cross-check.
const GELFAND_RADIUS: i64 = 128;
const GELFAND_SAMPLES: usize = 4096;
/// Quadrature nodes and level range for Bohr–Sommerfeld detection on `T*S¹`.
const BS_NODES: usize = 1024;
const BS_RANGE: f64 = 3.0;
/// Clock-shift checks are run for `ħ = p/q` up to this denominator.
const MAX_CLOCK_SHIFT_DIM: i64 = 64;
const RANDOM_PAIRS: usize = 12;
const SEED: u64 = 0x5197;

struct Ctx<'a> {
    cfg: &'a PipelineConfig,
    tol: Tolerances,
    mode: Mode,
}

impl Ctx<'_> {
    fn wants(&self, m: Module) -> bool {
        match self.mode {
            Mode::Check { only: Some(o) } => o == m,
            Mode::Sweep if m == Module::Deformation => true,
            _ => self.cfg.enabled(m),
        }
    }

    /// Zero for exact scalars.
    fn exact<S: Scalar>(&self) -> f64 {
        if S::EXACT {
            0.0
        } else {
            self.tol.residual
        }
    }

    fn add(
        &self,
        step: &mut Step,
        m: Module,
        f: impl FnOnce() -> Result<Vec<Check>, PipelineError>,
    ) -> Result<(), PipelineError> {
        if self.wants(m) {
            step.checks.extend(f()?);
        }
        Ok(())
    }
}

#[derive(Default)]
struct Run {
    steps: Vec<Step>,
    reduced_groupoid: Option<Value>,
    presentation: Option<String>,
    sweep: Option<SweepResult>,
    matrices: Option<MatrixRep>,
}

impl Run {
    /// Record a step; false when it failed, so downstream steps are skipped.
    fn close(&mut self, mut step: Step) -> bool {
        if step.checks.iter().any(|c| !c.passed) {
            step.status = StepStatus::Failed;
        }
        let ok = step.status != StepStatus::Failed;
        self.steps.push(step);
        ok
    }

    fn not_applicable(&mut self, name: &'static str, why: &str) {
        let mut s = Step::new(name);
        s.status = StepStatus::NotApplicable;
        s.set("reason", Value::from(why));
        self.steps.push(s);
    }

    fn finish(mut self) -> Self {
        for name in STEP_NAMES.iter().skip(self.steps.len()) {
            let mut s = Step::new(name);
            s.status = StepStatus::Skipped;
            self.steps.push(s);
        }
        self
    }
}

pub(super) fn execute<S: Scalar>(cfg: &PipelineConfig, mode: Mode, tol: Tolerances) -> Result<Outcome, PipelineError> {
    let ctx = Ctx { cfg, tol, mode };
    let mut run = Run::default();
    match &cfg.groupoid {
        GroupoidSpec::AbelianAction { .. } => action_flow::<S>(&ctx, &mut run)?,
        _ => chart_flow::<S>(&ctx, &mut run)?,
    }
    let run = run.finish();
    let report = PipelineReport {
        config_name: cfg.name.clone(),
        config_hash: cfg.hash.clone(),
        scalar: match cfg.scalar {
            ScalarChoice::Exact => "rational",
            ScalarChoice::Float => "f64",
        },
        mode: mode.tag(),
        only: match mode {
            Mode::Check { only } => only,
            _ => None,
        },
        steps: run.steps,
        reduced_groupoid: run.reduced_groupoid,
        presentation: run.presentation,
    };
    Ok(Outcome {
        report,
        sweep: run.sweep,
        matrices: run.matrices,
    })
}

fn matrix_json<S: Scalar>(m: &Matrix<S>) -> Value {
    Value::Array(
        (0..m.rows())
            .map(|i| Value::Array(m.row(i).iter().map(scalar_to_json).collect()))
            .collect(),
    )
}

fn scalar_hbar<S: Scalar>(cfg: &PipelineConfig) -> Result<Option<S>, PipelineError> {
    match &cfg.hbar {
        Some(HbarSpec::Scalar(v)) => Ok(Some(scalar(v, "hbar")?)),
        _ => Ok(None),
    }
}

fn schema(msg: impl Into<String>) -> PipelineError {
    PipelineError::Schema(msg.into())
}

fn default_potential<S: Scalar>(spec: &GroupoidSpec, d: usize) -> SymplecticPotential<S> {
    match spec {
        GroupoidSpec::Linear => SymplecticPotential::minus_x_dy(d),
        GroupoidSpec::Weinstein { .. } => {
            // −x¹dy₁ + y₂dx², adapted to span{∂x¹, ∂y₂}
            let mut form = OneForm::zero(4);
            form.coeffs[2] = -&Polynomial::var(4, 0);
            form.coeffs[1] = Polynomial::var(4, 3);
            SymplecticPotential::new(form)
        }
        _ => SymplecticPotential::y_dx(d),
    }
}

fn weinstein_polarization<S: Scalar>() -> PolarizationSpec<S> {
    let e = |k: usize| {
        let mut v = vec![complexify(S::zero()); 4];
        v[k] = complexify(S::one());
        v
    };
    PolarizationSpec::constant(vec![e(0), e(3)], 0.0).expect("independent unit vectors")
}

/// Recipe on a linear chart: everything except the abelian action groupoid.
fn chart_flow<S: Scalar>(ctx: &Ctx<'_>, run: &mut Run) -> Result<(), PipelineError> {
    let cfg = ctx.cfg;
    let exact = ctx.exact::<S>();
    let spec = &cfg.groupoid;

    // built
    let mut step = Step::new("built");
    let poisson = parse_poisson_spec::<S>(&cfg.poisson)?;
    step.set("poisson", poisson_spec_json(&poisson));
    ctx.add(&mut step, Module::Poisson, || {
        let j = jacobi_residual(&poisson.to_polynomial())?;
        Ok(vec![Check::residual(Module::Poisson, "Jacobi identity", j.max_abs, exact)])
    })?;
    let pi = poisson.as_constant().ok_or_else(|| {
        PipelineError::Unsupported("explicit symplectic groupoids are only built for constant Poisson structures".into())
    })?;
    let d = pi.dim();
    let hbar = scalar_hbar::<S>(cfg)?;
    check_dimensions(spec, &pi, hbar.as_ref())?;
    let g = LinearSymplecticGroupoid::build_constant(pi.clone());
    step.set("dim", Value::from(d));
    ctx.add(&mut step, Module::Groupoid, || {
        let axioms = g.check_axioms();
        let worst = axioms
            .iter()
            .max_by(|a, b| a.residual.total_cmp(&b.residual))
            .expect("identities are listed");
        let (t, s) = g.check_target_poisson();
        let mut ident = Check::residual(Module::Groupoid, "structure identities", worst.residual, exact);
        if !ident.passed {
            ident = ident.with_note(format!("worst: {}", worst.name));
        }
        Ok(vec![
            ident,
            Check::residual(Module::Groupoid, "∂*ω = 0", g.check_multiplicative_symplectic(), exact),
            Check::residual(Module::Groupoid, "t is Poisson", t, exact),
            Check::residual(Module::Groupoid, "s is anti-Poisson", s, exact),
        ])
    })?;
    if !run.close(step) {
        return Ok(());
    }

    // checked
    let mut step = Step::new("checked");
    let theta = match &cfg.potential {
        Some(p) => p.build::<S>(d)?,
        None => default_potential(spec, d),
    };
    let pol = match (&cfg.polarization, spec) {
        (Some(p), _) => p.build::<S>(d, exact)?,
        (None, GroupoidSpec::Weinstein { .. }) => weinstein_polarization(),
        (None, _) => PolarizationSpec::horizontal(d),
    };
    ctx.add(&mut step, Module::Potential, || {
        let r = check_potential(&theta, &g)?;
        Ok(vec![
            Check::residual(Module::Potential, "dθ = −ω", r.exterior.max_abs_coefficient(), exact),
            Check::residual(Module::Potential, "θ vanishes on units", r.unit.max_abs_coefficient(), exact),
        ])
    })?;
    let adapted = is_adapted(&theta, &pol)?;
    step.set("adapted", Value::from(adapted));
    step.set("require_adapted", Value::from(cfg.require_adapted));
    if cfg.require_adapted {
        ctx.add(&mut step, Module::Potential, || {
            Ok(vec![Check::flag(Module::Potential, "θ annihilates the polarization", adapted)])
        })?;
    }
    ctx.add(&mut step, Module::Polarization, || {
        let r = check_polarization(&g, &pol, exact)?;
        Ok(vec![
            Check::flag(Module::Polarization, "involutive", r.involutive),
            Check::flag(Module::Polarization, "Lagrangian", r.lagrangian),
            Check::residual(Module::Polarization, "ω restricted to P", r.isotropy_residual, exact),
            Check::flag(Module::Polarization, "Hermitian", r.hermitian),
            Check::flag(Module::Polarization, "multiplicative", r.multiplicative),
        ])
    })?;
    if !run.close(step) {
        return Ok(());
    }

    // derived
    let mut step = Step::new("derived");
    let cob = coboundary_potential(&theta, &g, exact)?;
    let scale = match spec {
        GroupoidSpec::Linear => PhaseScale::Radians,
        _ => PhaseScale::Turns,
    };
    let sigma = match &cob.status {
        CoboundaryStatus::Exact(phi) => {
            step.set("phi", Value::from(phi.to_string()));
            Some(reduced_cocycle_from_phi(phi, d, scale)?)
        }
        other => {
            // downstream steps need φ, so this failure is reported regardless of --only
            step.checks.push(Check::flag(Module::Twist, "∂*θ is exact", false).with_note(format!("{other:?}")));
            None
        }
    };
    if let Some(b) = &sigma {
        step.set("sigma0", bicharacter_json(b));
        ctx.add(&mut step, Module::Twist, || {
            Ok(vec![
                Check::flag(Module::Twist, "∂*θ is exact", true),
                Check::residual(
                    Module::Twist,
                    "σ₀ cocycle identity",
                    b.check_on_window(LATTICE_WINDOW_RADIUS).max_residual,
                    ctx.tol.residual,
                ),
            ])
        })?;
    }
    if !run.close(step) {
        return Ok(());
    }
    let sigma = sigma.expect("closed step has a cocycle");

    // reduced
    let mut step = Step::new("reduced");
    let case = match spec {
        GroupoidSpec::Linear => None,
        GroupoidSpec::CotangentTorus => Some(BsCase::TorusHorizontal { p0: pi.clone() }),
        GroupoidSpec::CotangentCircle => Some(BsCase::CotangentCircle),
        GroupoidSpec::Weinstein { .. } => Some(BsCase::Weinstein {
            hbar: hbar.clone().expect("checked with the dimensions"),
        }),
        GroupoidSpec::TorusBundle { rank, rotation, .. } => Some(BsCase::TorusBundle {
            rank: *rank,
            rotation: rotation.iter().map(|r| scalar(r, "rotation")).collect::<Result<_, _>>()?,
        }),
        GroupoidSpec::AbelianAction { .. } => unreachable!("handled by the action flow"),
    };
    let reduction = match &case {
        None => {
            if !same_span(&pol.matrix(), &PolarizationSpec::<S>::horizontal(d).matrix(), exact) {
                return Err(PipelineError::Unsupported(
                    "the linear case is only reduced along the fibration kernel".into(),
                ));
            }
            // leaves are the affine x-planes: contractible, no condition
            run.reduced_groupoid = Some(json!({
                "bs_conditions": Vec::<String>::new(),
                "reduced_groupoid": {"kind": "vector_group", "dim": d},
                "twist": {"kind": "bicharacter", "data": bicharacter_json(&sigma)},
            }));
            run.presentation = Some("C*(V*, σ₀)".into());
            None
        }
        Some(case) => {
            let red = bs_reduce(case)?;
            ctx.add(&mut step, Module::Reduction, || {
                let mut checks = vec![
                    Check::residual(
                        Module::Reduction,
                        "retained leaves have trivial holonomy",
                        red.leaf_holonomy_residual,
                        ctx.tol.holonomy,
                    ),
                    Check::flag(Module::Reduction, "half-integer leaf is rejected", red.rejected_leaf_holonomy > 0.5),
                    Check::residual(Module::Reduction, "reduced cocycle identity", red.cocycle_residual, ctx.tol.residual),
                ];
                match spec {
                    GroupoidSpec::CotangentTorus => checks.push(Check::flag(
                        Module::Reduction,
                        "derived twist equals the reduced twist",
                        red.bicharacter() == Some(&sigma),
                    )),
                    GroupoidSpec::Weinstein { .. } => checks.push(Check::flag(
                        Module::Reduction,
                        "adapted potential has trivial coboundary",
                        sigma.is_trivial(),
                    )),
                    GroupoidSpec::CotangentCircle => checks.extend(circle_levels(ctx, &theta)?),
                    _ => {}
                }
                Ok(checks)
            })?;
            run.reduced_groupoid = Some(red.to_json());
            run.presentation = Some(red.presentation());
            Some(red)
        }
    };
    step.set("case", Value::from(reduction.as_ref().map_or("linear", |r| r.case_name)));
    if !run.close(step) {
        return Ok(());
    }

    // constructed
    let mut step = Step::new("constructed");
    step.set("norms", Value::from("reduced: regular representation, truncated at R where infinite"));
    match spec {
        GroupoidSpec::Linear => linear_algebra(ctx, &mut step, &sigma)?,
        GroupoidSpec::CotangentTorus => torus_algebra(ctx, run, &mut step, &sigma)?,
        GroupoidSpec::CotangentCircle => circle_algebra::<S>(ctx, &mut step)?,
        GroupoidSpec::Weinstein { grid } => weinstein_algebra(ctx, &mut step, hbar.expect("present"), *grid)?,
        GroupoidSpec::TorusBundle { rotation, grid, .. } => {
            let rotation = rotation.iter().map(|r| scalar(r, "rotation")).collect::<Result<Vec<S>, _>>()?;
            bundle_algebra(ctx, &mut step, &rotation, *grid)?
        }
        GroupoidSpec::AbelianAction { .. } => unreachable!(),
    }
    if ctx.wants(Module::Deformation) {
        match spec {
            GroupoidSpec::CotangentTorus if d == 2 => deformation_checks::<S>(ctx, run, &mut step)?,
            GroupoidSpec::Weinstein { .. } => deformation_checks::<S>(ctx, run, &mut step)?,
            _ => {
                return Err(PipelineError::Unsupported(
                    "deformation diagnostics are wired to the two-torus only".into(),
                ))
            }
        }
    }
    run.close(step);
    Ok(())
}

fn check_dimensions<S: Scalar>(spec: &GroupoidSpec, pi: &ConstantPoisson<S>, hbar: Option<&S>) -> Result<(), PipelineError> {
    let d = pi.dim();
    let need = |want: usize, what: &str| {
        if d == want {
            Ok(())
        } else {
            Err(schema(format!("{what} needs a Poisson structure of dimension {want}, got {d}")))
        }
    };
    match spec {
        GroupoidSpec::CotangentCircle => need(1, "cotangent_circle"),
        GroupoidSpec::Weinstein { .. } => {
            need(2, "weinstein")?;
            let h = hbar.ok_or_else(|| schema("weinstein needs a scalar hbar"))?;
            if *pi != ConstantPoisson::planar(h.clone()) {
                return Err(schema("weinstein: poisson must be [[0, hbar], [−hbar, 0]] on the cover chart"));
            }
            Ok(())
        }
        GroupoidSpec::CotangentTorus => {
            if let (Some(h), 2) = (hbar, d) {
                if pi.matrix()[(0, 1)] != *h {
                    return Err(schema("cotangent_torus: hbar disagrees with the poisson entry (0, 1)"));
                }
            }
            Ok(())
        }
        GroupoidSpec::TorusBundle { rank, .. } => {
            need(*rank, "torus_bundle")?;
            if !pi.is_zero() {
                return Err(schema("torus_bundle: the fiber chart carries π = 0"));
            }
            Ok(())
        }
        _ => Ok(()),
    }
}

fn bicharacter_json<S: Scalar>(b: &Bicharacter<S>) -> Value {
    json!({
        "phi": matrix_json(&b.phi),
        "scale": match b.scale { PhaseScale::Radians => "radians", PhaseScale::Turns => "turns" },
        "trivial": b.is_trivial(),
    })
}

/// Quadrature holonomy on `T*S¹` matches `e^{−2πiy}` and the detected
/// levels are the integers.
fn circle_levels<S: Scalar>(ctx: &Ctx<'_>, theta: &SymplecticPotential<S>) -> Result<Vec<Check>, PipelineError> {
    let hol = |y: f64| {
        let lp = Loop::Straight {
            base: vec![0.0, y],
            period: vec![TAU, 0.0],
        };
        holonomy_forced_quadrature(theta, &lp, BS_NODES).map(|h| h.value)
    };
    let mut worst: f64 = 0.0;
    for k in 0..=600 {
        let y = -BS_RANGE + 2.0 * BS_RANGE * k as f64 / 600.0;
        worst = worst.max((hol(y)? - Complex64::from_polar(1.0, -TAU * y)).norm());
    }
    let levels = bs_levels(hol, -BS_RANGE, BS_RANGE, 601)?;
    let expected: Vec<f64> = (-3..=3).map(f64::from).collect();
    let gap = if levels.len() == expected.len() {
        levels.iter().zip(&expected).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    } else {
        f64::INFINITY
    };
    // closed form available along the loop: cross-check it too
    let closed = holonomy(
        theta,
        &Loop::Straight {
            base: vec![0.0, 0.25],
            period: vec![TAU, 0.0],
        },
        BS_NODES,
    )?;
    Ok(vec![
        Check::residual(Module::Reduction, "quadrature holonomy = e^{−2πiy}", worst, ctx.tol.holonomy),
        Check::residual(Module::Reduction, "Bohr–Sommerfeld levels are ℤ", gap, ctx.tol.bs_set)
            .with_note(format!("{} levels in [−3, 3]", levels.len())),
        Check::residual(
            Module::Reduction,
            "closed-form holonomy at y = 1/4",
            (closed.value - Complex64::new(0.0, -1.0)).norm(),
            ctx.tol.holonomy,
        ),
    ])
}

fn random_element<S: Scalar>(alg: &Arc<LatticeAlgebra<S>>, rng: &mut impl Rng, radius: i64, terms: usize) -> LatticeElement<S> {
    let d = alg.dim();
    LatticeElement::from_terms(
        alg,
        (0..terms).map(|_| {
            let m: Vec<i64> = (0..d).map(|_| rng.gen_range(-radius..=radius)).collect();
            (m, Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        }),
    )
}

/// Associativity and `(ab)* = b*a*` on random elements.
fn lattice_identities<S: Scalar>(alg: &Arc<LatticeAlgebra<S>>, tol: f64) -> Result<Vec<Check>, PipelineError> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(SEED);
    let (mut assoc, mut star): (f64, f64) = (0.0, 0.0);
    for _ in 0..RANDOM_PAIRS {
        let a = random_element(alg, &mut rng, 2, 4);
        let b = random_element(alg, &mut rng, 2, 4);
        let c = random_element(alg, &mut rng, 2, 4);
        let left = a.convolve(&b)?.convolve(&c)?;
        let right = a.convolve(&b.convolve(&c)?)?;
        assoc = assoc.max(left.distance(&right));
        star = star.max(a.convolve(&b)?.adjoint().distance(&b.adjoint().convolve(&a.adjoint())?));
    }
    Ok(vec![
        Check::residual(Module::Algebra, "associativity", assoc, tol),
        Check::residual(Module::Algebra, "(ab)* = b*a*", star, tol),
    ])
}

fn linear_algebra<S: Scalar>(ctx: &Ctx<'_>, step: &mut Step, sigma: &Bicharacter<S>) -> Result<(), PipelineError> {
    // the integer lattice of V* in radians: B = Φ/π
    let b = sigma.half_turn_matrix_f64();
    step.set("sigma0_exponent", matrix_json(&sigma.phi));
    step.set("B_on_integer_lattice", matrix_json(&b));
    let alg = LatticeAlgebra::<f64>::new(b)?;
    ctx.add(step, Module::Algebra, || {
        let mut checks = lattice_identities(&alg, ctx.tol.residual)?;
        let d = alg.dim();
        let mut worst: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                let (mut ei, mut ej) = (vec![0; d], vec![0; d]);
                ei[i] = 1;
                ej[j] = 1;
                let lhs = alg.delta(ei.clone()).convolve(&alg.delta(ej.clone()))?;
                let rhs = alg.delta(ej.clone()).convolve(&alg.delta(ei.clone()))?;
                let phase = sigma.commutator_phase(&ei, &ej);
                worst = worst.max(lhs.distance(&rhs.scale(phase)));
            }
        }
        checks.push(Check::residual(Module::Algebra, "δ_{e_i}δ_{e_j} = σ₀(e_i,e_j)/σ₀(e_j,e_i) δ_{e_j}δ_{e_i}", worst, ctx.tol.residual));
        Ok(checks)
    })
}

fn max_abs(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn torus_algebra<S: Scalar>(ctx: &Ctx<'_>, run: &mut Run, step: &mut Step, sigma: &Bicharacter<S>) -> Result<(), PipelineError> {
    let alg = LatticeAlgebra::from_bicharacter(sigma)?;
    step.set("B", matrix_json(alg.b()));
    if alg.dim() != 2 {
        return ctx.add(step, Module::Algebra, || lattice_identities(&alg, ctx.tol.residual));
    }
    let hbar = sigma.phi[(1, 0)].clone() - sigma.phi[(0, 1)].clone();
    step.set("hbar", scalar_to_json(&hbar));
    let expected = (-hbar.clone()).rem_euclid_int(1);
    ctx.add(step, Module::Algebra, || {
        let (u, v) = (alg.delta(vec![1, 0]), alg.delta(vec![0, 1]));
        let phase = Complex64::from_polar(1.0, TAU * expected.approx());
        let residual = u.convolve(&v)?.distance(&v.convolve(&u)?.scale(phase));
        let exponent = alg.commutator_turns(&[1, 0], &[0, 1]);
        let mut checks = lattice_identities(&alg, ctx.tol.residual)?;
        checks.push(Check::flag(Module::Algebra, "commutator exponent is −ħ mod 1", exponent == expected));
        checks.push(Check::residual(Module::Algebra, "δ₁₀δ₀₁ = e^{−2πiħ}δ₀₁δ₁₀", residual, ctx.tol.residual));
        Ok(checks)
    })?;

    let pq = to_rational(&hbar).and_then(|r| Some((r.numer().to_i64()?, r.denom().to_i64()?)));
    let Some((p, q)) = pq.filter(|&(_, q)| q <= MAX_CLOCK_SHIFT_DIM) else {
        step.set("clock_shift", Value::Null);
        return Ok(());
    };
    let cs = clock_shift_rep(p, q)?;
    step.set("clock_shift", json!({"p": p, "q": q, "dim": q}));
    ctx.add(step, Module::Algebra, || {
        let (u, v) = (cs.rep.generator("U").expect("U"), cs.rep.generator("V").expect("V"));
        let phase = Complex64::from_polar(1.0, -TAU * p as f64 / q as f64);
        let relation = max_abs(&(u * v - v * u * phase));
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(SEED + 1);
        let (mut hom, mut star, mut cstar): (f64, f64, f64) = (0.0, 0.0, 0.0);
        for _ in 0..RANDOM_PAIRS {
            let a = random_element(&alg, &mut rng, 3, 6);
            let b = random_element(&alg, &mut rng, 3, 6);
            let (ra, rb) = (cs.represent(&a)?, cs.represent(&b)?);
            hom = hom.max(max_abs(&(cs.represent(&a.convolve(&b)?)? - &ra * &rb)));
            star = star.max(max_abs(&(cs.represent(&a.adjoint())? - ra.adjoint())));
            cstar = cstar.max(cstar_identity_check(&a, &cs)?);
        }
        Ok(vec![
            Check::residual(Module::Algebra, "clock-shift unitarity", cs.rep.unitarity_residual(), ctx.tol.residual),
            Check::residual(Module::Algebra, "clock-shift UV = e^{−2πip/q}VU", relation, ctx.tol.residual),
            Check::residual(Module::Algebra, "clock-shift multiplicative", hom, ctx.tol.residual),
            Check::residual(Module::Algebra, "clock-shift preserves *", star, ctx.tol.residual),
            Check::residual(Module::Algebra, "C*-identity in the clock-shift representation", cstar, ctx.tol.residual),
        ])
    })?;
    run.matrices = Some(cs.rep);
    Ok(())
}

/// `‖Σ aₙδₙ‖` in the truncated regular representation against the sup-norm
/// of `Σ aₙ e^{2πinx}` on a fine grid.
fn circle_algebra<S: Scalar>(ctx: &Ctx<'_>, step: &mut Step) -> Result<(), PipelineError> {
    let alg = LatticeAlgebra::<S>::untwisted(1);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(SEED + 2);
    let a = random_element(&alg, &mut rng, 4, 6);
    let norm = truncated_regular_rep(&a, GELFAND_RADIUS)?.norm();
    let sup = (0..GELFAND_SAMPLES)
        .map(|k| {
            let x = k as f64 / GELFAND_SAMPLES as f64;
            a.terms()
                .map(|(n, c)| c * Complex64::from_polar(1.0, TAU * n[0] as f64 * x))
                .sum::<Complex64>()
                .norm()
        })
        .fold(0.0, f64::max);
    step.set("gelfand", json!({
        "truncated_norm": json_float(norm.value),
        "sup_norm": json_float(sup),
        "R": GELFAND_RADIUS,
        "method": norm.method.tag(),
    }));
    ctx.add(step, Module::Algebra, || {
        let mut checks = lattice_identities(&alg, ctx.tol.residual)?;
        checks.push(Check::residual(
            Module::Algebra,
            "Gelfand: truncated norm vs sup-norm (relative)",
            (norm.value - sup).abs() / sup,
            ctx.tol.gelfand,
        ));
        Ok(checks)
    })
}

fn weinstein_algebra<S: Scalar>(ctx: &Ctx<'_>, step: &mut Step, hbar: S, grid: usize) -> Result<(), PipelineError> {
    let action = CrossedAction::circle(grid, hbar.clone())?;
    let lattice = LatticeAlgebra::torus(hbar.clone());
    let rel = action.generator_relation_check(0, 0)?;
    let lat = lattice.commutator_turns(&[1, 0], &[0, 1]);
    step.set("crossed_product", json!({
        "grid": grid,
        "relation_turns": scalar_to_json(&rel.phase_turns),
        "exact": rel.exact,
    }));
    step.set("lattice_relation_turns", scalar_to_json(&lat));
    ctx.add(step, Module::Algebra, || {
        let gap = if S::EXACT {
            if rel.phase_turns == lat {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            let t = (rel.phase_turns.approx() - lat.approx()).rem_euclid(1.0);
            t.min(1.0 - t)
        };
        Ok(vec![
            Check::residual(Module::Algebra, "crossed-product relation residual", rel.residual, ctx.tol.residual),
            Check::residual(Module::Algebra, "crossed-product phase equals lattice phase", gap, ctx.tol.residual),
            Check::flag(
                Module::Algebra,
                "relation phase is e^{−2πiħ}",
                if S::EXACT {
                    lat == (-hbar.clone()).rem_euclid_int(1)
                } else {
                    ((lat.approx() + hbar.approx()).rem_euclid(1.0)).min(1.0 - (lat.approx() + hbar.approx()).rem_euclid(1.0)) <= ctx.tol.residual
                },
            ),
        ])
    })
}

fn bundle_algebra<S: Scalar>(ctx: &Ctx<'_>, step: &mut Step, rotation: &[S], grid: usize) -> Result<(), PipelineError> {
    let k = rotation.len();
    let shifts: Vec<Vec<S>> = (0..k)
        .map(|j| (0..k).map(|a| if a == j { rotation[j].clone() } else { S::zero() }).collect())
        .collect();
    let action = CrossedAction::new(
        vec![grid; k],
        shifts,
        CrossedTwist::Character {
            weight: -1,
            phases: rotation.to_vec(),
        },
    )?;
    step.set("grid", Value::from(vec![grid; k]));
    ctx.add(step, Module::Algebra, || {
        let mut checks = Vec::new();
        for j in 0..k {
            let rel = action.generator_relation_check(j, j)?;
            checks.push(Check::residual(Module::Algebra, format!("u_{j} v_{j} = e^{{−2πiθ_{j}}} v_{j} u_{j}"), rel.residual, ctx.tol.residual));
            checks.push(Check::flag(
                Module::Algebra,
                format!("relation exponent {j} is −θ_{j}"),
                if S::EXACT {
                    rel.phase_turns == (-rotation[j].clone()).rem_euclid_int(1)
                } else {
                    let t = (rel.phase_turns.approx() + rotation[j].approx()).rem_euclid(1.0);
                    t.min(1.0 - t) <= ctx.tol.residual
                },
            ));
            let sec = section_conjugation_check(&action, j, 1, 4, SEED + j as u64)?;
            checks.push(Check::residual(Module::Algebra, format!("section conjugation {j}"), sec.max_residual, ctx.tol.residual));
        }
        Ok(checks)
    })
}

fn deformation_checks<S: Scalar>(ctx: &Ctx<'_>, run: &mut Run, step: &mut Step) -> Result<(), PipelineError> {
    let def = &ctx.cfg.deformation;
    let grid: Vec<S> = match (&def.grid, &ctx.cfg.hbar) {
        (Some(g), _) => grid_values(g)?,
        (None, Some(HbarSpec::Grid(g))) => grid_values(g)?,
        _ => dyadic_grid(3, 10),
    };
    let result = sweep(&def.f, &def.g, &grid, def.poisson, def.radius)?;
    let monomials = def.f.terms().count() == 1 && def.g.terms().count() == 1;
    let last = result.points.last().expect("non-empty grid");
    step.set("sweep", json!({
        "points": result.points.len(),
        "fitted_order": result.fitted_order.map(json_float),
        "smallest_hbar": json_float(last.hbar),
        "error_at_smallest_hbar": json_float(last.error),
        "l1_bound_at_smallest_hbar": json_float(last.l1_bound),
    }));
    step.checks.push(Check::flag(Module::Deformation, "defect decreases along the grid", result.is_monotone_decreasing()));
    if monomials && result.points.iter().any(|p| p.error > 0.0) {
        let order = result.fitted_order.unwrap_or(f64::NAN);
        step.checks.push(
            Check::residual(Module::Deformation, "fitted order is 2", (order - 2.0).abs(), ctx.tol.order)
                .with_note(format!("order {order:.4}")),
        );
    } else {
        step.checks.push(Check::residual(Module::Deformation, "defect at the smallest ħ", last.error, ctx.tol.defect));
    }
    run.sweep = Some(result);
    Ok(())
}

/// Abelian action groupoids: only the groupoid layer is explicit.
fn action_flow<S: Scalar>(ctx: &Ctx<'_>, run: &mut Run) -> Result<(), PipelineError> {
    let GroupoidSpec::AbelianAction { pi, rho, resolution, radius } = &ctx.cfg.groupoid else {
        unreachable!()
    };
    let pi = scalar_matrix::<S>(pi, "groupoid.pi")?;
    let rho = scalar_matrix::<S>(rho, "groupoid.rho")?;
    let base = BaseGrid {
        dims: rho.rows(),
        resolution: *resolution,
    };
    let g = AbelianActionGroupoid::new(pi.clone(), rho, base)?;
    let mut step = Step::new("built");
    let covectors = g.grid_covectors(*radius);
    step.set("covectors", Value::from(covectors.len()));
    step.set("grid", json!({"dims": base.dims, "resolution": base.resolution}));
    ctx.add(&mut step, Module::Groupoid, || {
        let (triples, failures) = g.check_axioms_exhaustive(&covectors);
        let mut axioms = Check::flag(Module::Groupoid, "groupoid axioms on the grid", failures.is_empty() && triples > 0)
            .with_note(format!("{triples} composable triples"));
        if let Some(f) = failures.first() {
            axioms = axioms.with_note(format!("{} failures, first: {f}", failures.len()));
        }
        let mut checks = vec![axioms];
        if pi.is_zero(0.0) {
            let mut ok = true;
            for u in &covectors {
                for v in &covectors {
                    for p in base.points() {
                        let a = g.arrow(u.clone(), p.clone())?;
                        let b = g.arrow(v.clone(), p.clone())?;
                        let sum: Vec<S> = u.iter().zip(v).map(|(x, y)| x.clone() + y.clone()).collect();
                        ok &= g.mult(&a, &b).ok() == Some(g.arrow(sum, p)?);
                    }
                }
            }
            checks.push(Check::flag(Module::Groupoid, "Π = 0: fiberwise addition", ok));
        }
        Ok(checks)
    })?;
    if !run.close(step) {
        return Ok(());
    }
    for name in &STEP_NAMES[1..] {
        run.not_applicable(name, "potential, polarization and twist are only explicit on linear charts");
    }
    Ok(())
}
