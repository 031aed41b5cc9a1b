//! Method-of-characteristics solver for `u_tt = a² u_xx + f` in the
//! curvilinear half-strip `{t > 0, γ(t) < x < l}` with a Dirichlet
//! condition on the moving end, a dynamic condition
//! `u_tt + b u_x = μ₂` on `x = l`, and a jump `v` in the initial velocity
//! at `x = l`.
//!
//! ```
//! use charwave::{ProblemDefinition, ProblemSpec, Sides, Solution, SolveOptions};
//!
//! let mut def = ProblemDefinition::zero(1.0, 0.0, 1.0, 1.0);
//! def.phi = "x^2".into();
//! def.mu1 = "t^2".into();
//! def.mu2 = "2".into();
//! let spec = ProblemSpec::new(&def).unwrap();
//! let sol = Solution::build(&spec, SolveOptions::default()).unwrap();
//! let (u, _, _) = sol.evaluate(0.2, 0.5, Sides::AUTO).unwrap();
//! assert!((u - 0.29).abs() < 1e-14);
//! ```

pub mod error;
pub mod expr;
pub mod geometry;
pub mod jumps;
pub mod numeric;
pub mod problem;
pub mod solution;
pub mod validation;
pub mod waves;

pub use error::{Error, Result};
pub use expr::{Expr, Smooth1, Source};
pub use geometry::{BoundaryCurve, BreakLine, Family, Partition, RegionIndex};
pub use jumps::{discontinuity_ladder, jump_constants, JumpTable, LadderReport};
pub use problem::{
    from_physical, validate_problem, JumpMode, MatchingReport, ProblemDefinition, ProblemSpec, Tolerances,
    ValidationReport,
};
pub use solution::{FieldJet, Parts, Side, Sides, Solution, SolutionField, SolveOptions};
pub use validation::{verify, CheckEntry, VerificationReport, VerifyOptions};
pub use waves::{Jet, SegmentKind, SegmentTable};
