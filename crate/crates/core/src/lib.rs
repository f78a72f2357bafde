//! Linear absorption of all-to-all coupled, permutation-symmetric molecular
//! aggregates.
//!
//! The aggregate of `N + 1` identical monomers is written on the symmetric
//! occupation basis of the single-excitation manifold ([`basis`]), where the
//! Hamiltonian is block tridiagonal in the number of vibrationally excited
//! ground-state molecules ([`hamiltonian`]). The absorption follows from the
//! sector-0 block of the resolvent, evaluated by continued-fraction recursion
//! ([`response`]); truncating the recursion at sector 0 gives the classical
//! optics (DDA/CPA/CES) limit. [`oracle`] rebuilds the problem in the
//! distinguishable-monomer product basis for validation.

pub mod basis;
pub mod error;
pub mod hamiltonian;
pub mod oracle;
pub mod response;
pub mod spectrum;
pub mod sweep;
pub mod vibronic;

pub use basis::{enumerate_manifold, locate, manifold_dimension, ManifoldBasis, OccState};
pub use error::{Error, Result};
pub use hamiltonian::{
    assemble_coupling, assemble_diag_block, build_chain, build_chain_with_cap,
    interaction_element, AggregateConfig, BlockChain,
};
pub use oracle::{compare, oracle_spectrum, site_hamiltonian, Deviation, SiteState};
pub use response::{
    compute, compute_spectrum, cpa_spectrum, dense_resolvent_k0, dipole_vector, resolvent_k0,
    spectrum, surrogate_coupling,
};
pub use spectrum::{find_peaks, sum_rule, FrequencyGrid, Method, Spectrum, SumRule};
pub use sweep::{sweep, SweepSurface};
pub use vibronic::{
    build_model, franck_condon_matrix, monomer_green, DisplacedOscillatorSpec, MonomerModel,
};
