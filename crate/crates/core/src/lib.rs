pub mod coherent;
pub mod error;
pub mod fock;
pub mod protocol;
pub mod quasi_bell;
pub mod records;
