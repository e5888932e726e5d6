//! Data-driven characterization of attraction regions in mass-action
//! kinetics systems.
//!
//! The pipeline: simulate trajectory snapshots of a stoichiometric network
//! ([`sim`]), fit a Koopman-operator approximation over an observable
//! dictionary ([`edmd`]), then locate and classify equilibria and extract
//! the dominant-eigenfunction level set through the saddle to bound the
//! basin of an asymptotically stable equilibrium ([`basin`]). The [`mak`]
//! module carries the network representation and the analytic oracle for
//! the bundled autocatalytic replicator example.

pub mod basin;
pub mod edmd;
pub mod mak;
pub mod sim;
