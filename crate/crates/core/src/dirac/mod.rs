//! Spin structures on the triple graph `Υ`, spinors and the discrete Dirac
//! equation, forms built from pairs of spinors, and the massive deformation
//! with elliptic half angles.

mod massive;
mod spin;
mod spinor;

pub use massive::{
    complete_i, complete_i_agm, elliptic_half_angle, elliptic_half_angle_agm, massive_flatness, massive_ratios,
    MassiveParams, MassiveReport, QUADRATURE_TOLERANCE,
};
pub use spin::{SpinStructure, SpinSummary};
pub use spinor::{
    classify_spinor_form, closing_defect, construct_dirac_spinor, dirac_exists, dirac_residual, dotsenko_solutions,
    dotsenko_step, dz_ratio, half_angles, spinor_form, transfer_matrix, DiracOutcome, DiracReport, DiracResidual,
    DiracWitness, Spinor, SpinorForm, PHASE_TOLERANCE,
};

#[cfg(test)]
mod tests;
