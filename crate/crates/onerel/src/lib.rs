//! One-relator complexes and their hierarchies.
//!
//! The library builds the hierarchy of a one-relator complex by passing to
//! minimal tree domains inside cyclic covers, extracts the induced HNN
//! splitting, computes the stable number of the traverse automorphism and the
//! graph of cyclic stabilisers, and decides from that data whether the group
//! contains a Baumslag-Solitar subgroup.
//!
//! Module map:
//!
//! * [`word`]: words and cyclic words in a free group, abelianization.
//! * [`whitehead`]: length-minimizing automorphisms, primitivity, Nielsen
//!   reduction of tuples.
//! * [`stallings`]: folded core graphs for finitely generated subgroups,
//!   membership, intersections, bases.
//! * [`primrank`]: primitivity rank and the witnessing subgroups.
//! * [`complex`]: one-relator complexes and their complexity.
//! * [`covers`]: cyclic covers, tree domains, and splittings read off from a
//!   domain.
//! * [`hierarchy`]: hierarchy length and tower construction.
//! * [`brown`]: Brown's criterion for characters of one-relator groups and
//!   hyperplane splittings.
//! * [`stability`]: stable numbers of HNN traverse maps.
//! * [`gocs`]: the graph of cyclic stabilisers and Baumslag-Solitar
//!   detection.
//! * [`report`]: versioned machine-readable rendering of results.

pub mod brown;
pub mod complex;
pub mod covers;
pub mod gocs;
pub mod hierarchy;
pub mod primrank;
pub mod report;
pub mod stability;
pub mod stallings;
pub mod whitehead;
pub mod word;
