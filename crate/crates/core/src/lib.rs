//! Exact computer algebra for the mod-p Iwasawa algebra of the first congruence
//! kernel of a split simply connected Chevalley group.

pub mod chevmodel;
pub mod constants;
pub mod error;
pub mod kernel_verify;
pub mod lazseries;
pub mod modular;
pub mod normality;
pub mod rootsys;

pub use chevmodel::{
    build_model, congruence_level, h_element, lazard_coordinates, x_element, CongruenceLevel, Generator,
    GroupElement, LazardCoordinates, Model, Representation,
};
pub use constants::{structure_constants, ChevalleyConstants, CommutatorTerm};
pub use error::{Error, Result};
pub use modular::{ModpPowerInt, PadicRing};
pub use rootsys::{build_root_system, cartan_integer, highest_root, hyp_phi, CartanType, Family, Root, RootSystem};
pub use lazseries::{
    binomial_expand, element_to_series, partial_derivative, HomogeneousPolynomial, IwasawaSeries, Monomial,
    SeriesAlgebra, SeriesContext,
};
pub use kernel_verify::{
    beta_digits, expected_leading_term, prop31_sweep, verify_pde, verify_prop31, BetaDigits, CaseTag, CommutatorCase,
    LeadingTermFormula, LeadingTermTable, Provenance, Verdict, VerificationReport,
};
pub use normality::{
    candidate_catalog, claim52_check, claim54_decompose, decompose_candidate, diagram_chase, graded_divides,
    ideal_membership, normal_obstruction, ChaseCertificate, ChaseStatus, MembershipWitness, NormalCandidate,
    ObstructionReport, ObstructionVerdict,
};
