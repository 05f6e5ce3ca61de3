//! Constructive almost-finiteness toolkit for group actions on subshifts.
//!
//! The crate works at finite "desk" scale: groups are enumerated exactly,
//! configurations are lazy words, and every clopen-set statement is checked
//! against the factor language sampled from a finite window of the orbit.
//!
//! Module map:
//! - [`groups`]: exact arithmetic for ℤ, finite tables, D∞, direct products and
//!   lamplighters; balls, extensions and Følner certificates.
//! - [`words`]: periodic, Toeplitz, mirror, amplified, product and shifted words.
//! - [`subshift`]: sampled orbit points, pattern tables and cylinder sets.
//! - [`recurrence`]: recurrence sets, syndeticity, balanced witnesses and
//!   freeness probes.
//! - [`castles`]: towers, castles, Kakutani–Rokhlin partitions, dihedral tile
//!   castles, castle lifting and almost-finiteness-in-measure certificates.
//! - [`comparison`]: subequivalence witnesses and the upgrade to almost
//!   finiteness.
//! - [`pipeline`]: run configuration, reports and the example gallery.

pub mod castles;
pub mod comparison;
pub mod error;
pub mod exact;
pub mod groups;
pub mod pipeline;
pub mod recurrence;
pub mod subshift;
pub mod words;

pub use error::{Error, Result};
pub use exact::Rational;
pub use groups::{GroupDescriptor, GroupElement, GroupKind};
pub use words::{Alphabet, CylinderPattern, Symbol, Word, WordGenerator};
