//! Numerical toolkit for Dirichlet polynomials: evaluation and seminorms,
//! the Bohr lift to polynomials on the polydisc, minimax fitting on compact
//! sets (plain, seminorm-constrained and rational/Laurent), universal series
//! schedules, and chordal-metric convergence checks.

pub mod abscissa;
pub mod bohr;
pub mod chordal;
pub mod compact;
pub mod dirichlet;
pub mod error;
pub mod fit;
pub mod io;
pub mod laurent;
mod lattice;
pub mod par;
pub mod universal;

pub use abscissa::{estimate_abscissas, Abscissa, AbscissaReport, CoefficientRule, NamedRule};
pub use bohr::{
    factorize_to_multiindex, isometry_check, lift, polydisc_sup_estimate, unlift, IsometryPlan, IsometryReport,
    LiftedPolynomial, MultiIndex, PolydiscEstimate, PolydiscPlan, PrimeTable,
};
pub use chordal::{
    chi, chi_uniform_error, chordal_convergence_check, zeta_chordal_convergence_check, zeta_real, ChordalGrid, ChordalReport, ChordalRow,
    SpherePoint,
};
pub use compact::{CompactSetSpec, Contour, Density, DiscretizedSet, Shape};
pub use dirichlet::{sup_norm_halfplane, DirichletPolynomial, SupNormEstimate, SupNormPlan};
pub use fit::{constrained_fit, constrained_fit_from, convergence_study, minimax_fit, FitOptions, FitResult, StudyRow, TargetFunction};
pub use error::{Error, Result};
pub use laurent::{
    evaluate_rational, laurent_decompose, rational_dirichlet_fit, LaurentOptions, LaurentPieces, RationalDirichletFunction,
    RationalFit, RationalPart,
};
pub use par::set_thread_limit;
pub use universal::{
    build_universal, verify_schedule, TargetEntry, TargetFamily, UniversalOptions, UniversalSchedule, VerificationReport, VerifyOptions,
};
pub use num_complex::Complex64;
