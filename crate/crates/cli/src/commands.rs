use std::fmt;
use std::fs;
use std::path::Path;

use dirapprox::io::to_json_string;
use dirapprox::laurent::LaurentPieces;
use dirapprox::{
    build_universal, estimate_abscissas, isometry_check, laurent_decompose, lift, rational_dirichlet_fit, sup_norm_halfplane, unlift,
    verify_schedule, zeta_chordal_convergence_check, ChordalGrid, CoefficientRule, CompactSetSpec, Density, DirichletPolynomial,
    DiscretizedSet, Error, FitOptions, IsometryPlan, LaurentOptions, LiftedPolynomial, SupNormPlan, TargetFamily, TargetFunction,
    UniversalOptions, UniversalSchedule, VerifyOptions,
};
use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::Common;

#[derive(Debug)]
pub enum Failure {
    Invalid(String),
    Numerical(String),
    Resource(String),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Invalid(_) => 2,
            Failure::Numerical(_) => 3,
            Failure::Resource(_) => 4,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Invalid(m) => write!(f, "invalid input: {m}"),
            Failure::Numerical(m) => write!(f, "numerical failure: {m}"),
            Failure::Resource(m) => write!(f, "resource limit: {m}"),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::IllConditioned(_) => Failure::Numerical(e.to_string()),
            Error::ResourceLimit(_) => Failure::Resource(e.to_string()),
            _ => Failure::Invalid(e.to_string()),
        }
    }
}

type Outcome = Result<(), Failure>;

fn read_input<T: DeserializeOwned>(common: &Common) -> Result<T, Failure> {
    let path = common.input.as_ref().ok_or_else(|| Failure::Invalid("--input is required".into()))?;
    read_json(path)
}

fn read_optional_input<T: DeserializeOwned + Default>(common: &Common) -> Result<T, Failure> {
    match &common.input {
        Some(path) => read_json(path),
        None => Ok(T::default()),
    }
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Invalid(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))
}

fn write_text(path: Option<&Path>, text: &str) -> Outcome {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Invalid(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn write_json<T: Serialize>(common: &Common, value: &T) -> Outcome {
    let mut text = to_json_string(value).map_err(|e| Failure::Invalid(format!("serialization failed: {e}")))?;
    text.push('\n');
    write_text(common.output.as_deref(), &text)
}

fn positive(name: &str, v: f64) -> Result<f64, Failure> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(Failure::Invalid(format!("{name} must be positive, got {v}")))
    }
}

/// A compact set plus sampling density, as embedded in fitting inputs.
#[derive(Deserialize)]
struct SetInput {
    set: CompactSetSpec,
    #[serde(default)]
    density: Option<Density>,
}

impl SetInput {
    fn discretize(&self, common: &Common) -> Result<DiscretizedSet, Failure> {
        let density = match common.density {
            Some(h) => Density::uniform(positive("--density", h)?),
            None => self.density.unwrap_or_default(),
        };
        Ok(self.set.discretize(&density)?)
    }
}

fn format_complex(v: Complex64) -> String {
    if v.im == 0.0 {
        format!("{}", v.re)
    } else if v.im < 0.0 {
        format!("{}-{}i", v.re, -v.im)
    } else {
        format!("{}+{}i", v.re, v.im)
    }
}

#[derive(Deserialize)]
struct EvalInput {
    polynomial: DirichletPolynomial,
    points: Vec<Complex64>,
}

#[derive(Serialize)]
struct EvalOutput {
    points: Vec<Complex64>,
    values: Vec<Complex64>,
}

pub fn eval(common: &Common) -> Outcome {
    let input: EvalInput = read_input(common)?;
    let values = input.polynomial.evaluate_many(&input.points)?;
    match &common.output {
        Some(_) => write_json(common, &EvalOutput { points: input.points, values }),
        None => {
            let text: String = values.iter().map(|v| format_complex(*v) + "\n").collect();
            write_text(None, &text)
        }
    }
}

#[derive(Deserialize)]
struct ShiftInput {
    polynomial: DirichletPolynomial,
    delta: f64,
}

pub fn shift(common: &Common) -> Outcome {
    let input: ShiftInput = read_input(common)?;
    write_json(common, &input.polynomial.shift_by_delta(input.delta)?)
}

#[derive(Deserialize)]
struct SeminormInput {
    polynomial: DirichletPolynomial,
    #[serde(default)]
    sigma: Option<f64>,
}

#[derive(Serialize)]
struct SeminormOutput {
    sigma: f64,
    seminorm: f64,
}

pub fn seminorm(common: &Common) -> Outcome {
    let input: SeminormInput = read_input(common)?;
    let sigma = common.sigma.or(input.sigma).ok_or_else(|| Failure::Invalid("sigma is required".into()))?;
    if !sigma.is_finite() {
        return Err(Failure::Invalid(format!("sigma must be finite, got {sigma}")));
    }
    write_json(common, &SeminormOutput { sigma, seminorm: input.polynomial.seminorm_sigma(sigma) })
}

#[derive(Deserialize)]
struct SupnormInput {
    polynomial: DirichletPolynomial,
    #[serde(default)]
    sigma0: f64,
    #[serde(default)]
    plan: SupNormPlan,
}

pub fn supnorm(common: &Common) -> Outcome {
    let input: SupnormInput = read_input(common)?;
    let sigma0 = common.sigma.unwrap_or(input.sigma0);
    write_json(common, &sup_norm_halfplane(&input.polynomial, sigma0, &input.plan)?)
}

#[derive(Deserialize)]
struct AbscissaInput {
    rule: CoefficientRule,
    #[serde(default = "default_truncation")]
    truncation: usize,
}

fn default_truncation() -> usize {
    100_000
}

pub fn abscissa(common: &Common) -> Outcome {
    let input: AbscissaInput = read_input(common)?;
    let truncation = common.degree.unwrap_or(input.truncation);
    write_json(common, &estimate_abscissas(&input.rule, truncation)?)
}

#[derive(Deserialize)]
#[serde(untagged)]
enum LiftInput {
    Forward { polynomial: DirichletPolynomial },
    Inverse { lifted: LiftedPolynomial },
    // bare artifacts, as emitted by this command and others
    BareForward(DirichletPolynomial),
    BareInverse(LiftedPolynomial),
}

pub fn bohr_lift(common: &Common) -> Outcome {
    match read_input::<LiftInput>(common)? {
        LiftInput::Forward { polynomial } | LiftInput::BareForward(polynomial) => write_json(common, &lift(&polynomial)),
        LiftInput::Inverse { lifted } | LiftInput::BareInverse(lifted) => write_json(common, &unlift(&lifted)?),
    }
}

#[derive(Deserialize, Default)]
struct BohrCheckInput {
    #[serde(default)]
    polynomial: Option<DirichletPolynomial>,
    #[serde(default)]
    plan: IsometryPlan,
}

#[derive(Serialize)]
struct BohrCheckOutput {
    polynomial: DirichletPolynomial,
    #[serde(flatten)]
    report: dirapprox::IsometryReport,
}

pub fn bohr_check(common: &Common) -> Outcome {
    let mut input: BohrCheckInput = read_optional_input(common)?;
    let polynomial = match input.polynomial.take() {
        Some(p) => p,
        None => DirichletPolynomial::random_unit(common.degree.unwrap_or(20), common.seed.unwrap_or(0)),
    };
    if let Some(tol) = common.tol {
        input.plan.tolerance = positive("--tol", tol)?;
    }
    if let Some(seed) = common.seed {
        input.plan.polydisc.seed = seed;
    }
    let report = isometry_check(&polynomial, &input.plan)?;
    let ok = report.within_tolerance;
    let gap = report.relative_gap;
    write_json(common, &BohrCheckOutput { polynomial, report })?;
    if ok {
        Ok(())
    } else {
        Err(Failure::Numerical(format!("relative gap {gap} exceeds the tolerance")))
    }
}

#[derive(Deserialize)]
struct FitInput {
    #[serde(flatten)]
    set: SetInput,
    target: TargetFunction,
    #[serde(default)]
    degree: Option<usize>,
    #[serde(default)]
    options: FitOptions,
}

fn fit_outcome(result: &dirapprox::FitResult) -> Outcome {
    if result.converged {
        Ok(())
    } else {
        Err(Failure::Numerical(format!("fit did not converge (sup-error {})", result.minimax_error)))
    }
}

pub fn fit(common: &Common) -> Outcome {
    let mut input: FitInput = read_input(common)?;
    let degree = common.degree.or(input.degree).ok_or_else(|| Failure::Invalid("degree is required".into()))?;
    if let Some(tol) = common.tol {
        input.options.tol = positive("--tol", tol)?;
    }
    let set = input.set.discretize(common)?;
    let result = dirapprox::minimax_fit(&set, &input.target, degree, &input.options)?;
    write_json(common, &result)?;
    fit_outcome(&result)
}

#[derive(Deserialize)]
struct ConstrainedInput {
    #[serde(flatten)]
    fit: FitInput,
    f: DirichletPolynomial,
    #[serde(default)]
    sigma: Option<f64>,
    #[serde(default)]
    eps: Option<f64>,
}

pub fn fit_constrained(common: &Common) -> Outcome {
    let mut input: ConstrainedInput = read_input(common)?;
    let degree = common.degree.or(input.fit.degree).ok_or_else(|| Failure::Invalid("degree is required".into()))?;
    let sigma = common.sigma.or(input.sigma).ok_or_else(|| Failure::Invalid("sigma is required".into()))?;
    let eps = common.eps.or(input.eps).ok_or_else(|| Failure::Invalid("eps is required".into()))?;
    if let Some(tol) = common.tol {
        input.fit.options.error_target = Some(positive("--tol", tol)?);
    }
    let set = input.fit.set.discretize(common)?;
    let result = dirapprox::constrained_fit(&set, &input.fit.target, &input.f, sigma, eps, degree, &input.fit.options)?;
    write_json(common, &result)?;
    fit_outcome(&result)
}

#[derive(Deserialize)]
struct LaurentInput {
    #[serde(flatten)]
    set: SetInput,
    target: TargetFunction,
    #[serde(default)]
    anchors: Vec<Complex64>,
    #[serde(default)]
    points: Vec<Complex64>,
    #[serde(default)]
    options: LaurentOptions,
}

#[derive(Serialize)]
struct PieceValues {
    point: Complex64,
    f0: Complex64,
    holes: Vec<Complex64>,
    reconstructed: Complex64,
}

#[derive(Serialize)]
struct LaurentOutput {
    pieces: LaurentPieces,
    values: Vec<PieceValues>,
}

pub fn laurent(common: &Common) -> Outcome {
    let input: LaurentInput = read_input(common)?;
    let set = input.set.discretize(common)?;
    let pieces = laurent_decompose(&set, &input.target, &input.anchors, &input.options)?;
    let values = input
        .points
        .iter()
        .map(|&z| PieceValues {
            point: z,
            f0: pieces.f0(z),
            holes: (0..pieces.holes.len()).map(|j| pieces.fj(j, z)).collect(),
            reconstructed: pieces.reconstruct(z),
        })
        .collect();
    let warn = pieces.residual_warning;
    write_json(common, &LaurentOutput { pieces, values })?;
    if warn {
        eprintln!("warning: reconstruction residual above the requested tolerance");
    }
    Ok(())
}

#[derive(Deserialize)]
struct RationalInput {
    #[serde(flatten)]
    set: SetInput,
    target: TargetFunction,
    #[serde(default)]
    anchors: Vec<Complex64>,
    #[serde(default)]
    degrees: Vec<usize>,
    #[serde(default)]
    options: FitOptions,
    #[serde(default)]
    laurent: LaurentOptions,
}

pub fn rational_fit(common: &Common) -> Outcome {
    let mut input: RationalInput = read_input(common)?;
    if let Some(d) = common.degree {
        input.degrees = vec![d; input.anchors.len() + 1];
    }
    let set = input.set.discretize(common)?;
    let fit = rational_dirichlet_fit(&set, &input.target, &input.anchors, &input.degrees, &input.options, &input.laurent)?;
    write_json(common, &fit)
}

#[derive(Deserialize)]
struct BuildInput {
    family: TargetFamily,
    #[serde(default)]
    options: UniversalOptions,
}

/// The universal-build artifact; universal-verify consumes it directly.
#[derive(Serialize, Deserialize)]
struct BuildArtifact {
    family: TargetFamily,
    options: UniversalOptions,
    schedule: UniversalSchedule,
    #[serde(default, skip_serializing)]
    verify: Option<VerifyOptions>,
}

pub fn universal_build(common: &Common) -> Outcome {
    let mut input: BuildInput = read_input(common)?;
    if let Some(tol) = common.tol {
        let tol = positive("--tol", tol)?;
        input.family.entries.iter_mut().for_each(|e| e.tol = tol);
    }
    if let Some(h) = common.density {
        input.options.density = Density::uniform(positive("--density", h)?);
    }
    let schedule = build_universal(&input.family, &input.options)?;
    let failure = schedule.failure.as_ref().map(|f| f.reason.clone());
    write_json(common, &BuildArtifact { family: input.family, options: input.options, schedule, verify: None })?;
    match failure {
        Some(reason) => Err(Failure::Numerical(format!("stage failed: {reason}; partial schedule written"))),
        None => Ok(()),
    }
}

pub fn universal_verify(common: &Common) -> Outcome {
    let artifact: BuildArtifact = read_input(common)?;
    let options = artifact.verify.clone().unwrap_or_else(|| VerifyOptions {
        density: artifact.options.density,
        budget_scale: artifact.options.budget_scale,
        ladder_len: artifact.options.ladder_len,
        ..VerifyOptions::default()
    });
    let report = verify_schedule(&artifact.schedule, &artifact.family, &options)?;
    write_json(common, &report)?;
    if report.pass {
        Ok(())
    } else {
        Err(Failure::Numerical("schedule verification failed".into()))
    }
}

#[derive(Deserialize)]
#[serde(default)]
struct ChordalInput {
    interval: [f64; 2],
    ladder: Vec<usize>,
    eps: f64,
    grid: ChordalGrid,
}

impl Default for ChordalInput {
    fn default() -> Self {
        Self { interval: [-5.0, 5.0], ladder: vec![10, 100, 1_000, 10_000, 100_000], eps: 0.1, grid: ChordalGrid::default() }
    }
}

pub fn chordal_check(common: &Common, csv: Option<&Path>) -> Outcome {
    let input: ChordalInput = read_optional_input(common)?;
    let eps = common.eps.unwrap_or(input.eps);
    let report = zeta_chordal_convergence_check(input.interval, &input.ladder, eps, &input.grid)?;
    if let Some(path) = csv {
        write_text(Some(path), &report.to_csv())?;
    }
    write_json(common, &report)?;
    if report.found {
        Ok(())
    } else {
        Err(Failure::Numerical(format!("no N in the ladder reaches χ-error {eps}")))
    }
}

#[derive(Deserialize)]
struct StudyInput {
    #[serde(flatten)]
    set: SetInput,
    target: TargetFunction,
    degrees: Vec<usize>,
    #[serde(default)]
    options: FitOptions,
}

pub fn convergence_study(common: &Common) -> Outcome {
    let mut input: StudyInput = read_input(common)?;
    if let Some(tol) = common.tol {
        input.options.tol = positive("--tol", tol)?;
    }
    let set = input.set.discretize(common)?;
    let rows = dirapprox::convergence_study(&set, &input.target, &input.degrees, &input.options)?;
    write_text(common.output.as_deref(), &dirapprox::fit::study_csv(&rows))
}
