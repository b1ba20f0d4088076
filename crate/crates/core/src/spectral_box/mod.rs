//! Finite-box Hamiltonians `H0 + lambda V + W`, their eigenvalues outside
//! `[0, 4d]`, and eigenvalue-counting certificates.

pub mod counting;
pub mod eigen;
pub mod hamiltonian;

pub use counting::{counting_check, counting_check_one, random_ws, CertificateKind, CountingCertificate, Hypothesis};
pub use eigen::{eig_outside, kernel_dim, EigReport, EigenCluster, EigenMethod, KernelDim};
pub use hamiltonian::{build_hamiltonian, BoxHamiltonian, CsrMatrix};
