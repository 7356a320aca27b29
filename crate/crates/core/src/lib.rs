//! Exponential functional link network (EFLN) adaptive filters.
//!
//! The input is expanded into a linear channel and trigonometric channels
//! whose envelope `e^{−q|u|}` is shaped by an adapted exponential factor
//! `q`. Each channel feeds its own FIR combiner.
//!
//! * [`td`]: sample-wise and block time-domain filters.
//! * [`fd`]: the block filter evaluated with 50% overlap-save transforms.
//! * [`nanc`]: filtered-s controllers for active noise control.
//! * [`analysis`]: step-size bounds, steady-state excess MSE and operation
//!   counts.
//! * [`scenarios`]: signal generators, plants and path fixtures.
//!
//! ```
//! use fdefln::{AdaptConfig, ExpansionConfig, Fdefln};
//!
//! let cfg = AdaptConfig::new(8, ExpansionConfig::efln(1)?, 0.01, 0.01);
//! let mut filter = Fdefln::new(cfg)?;
//! let out = filter.process(&[0.1; 8], &[0.2; 8])?;
//! assert_eq!(out.e, vec![0.2; 8]);
//! # Ok::<(), fdefln::Error>(())
//! ```

pub mod analysis;
pub mod dsp;
mod error;
pub mod expansion;
pub mod fd;
pub mod filter;
pub mod nanc;
pub mod scenarios;
pub mod td;

pub use dsp::{FirCoefficients, SampleBlock, SeededRng, Spectrum, Transform};
pub use error::{Error, Result};
pub use expansion::{ExpandedChannels, ExpansionConfig, ExpansionKind};
pub use fd::Fdefln;
pub use filter::{AdaptConfig, BlockFilter, BlockOutput, BlockTrace};
pub use nanc::{AncController, BlockEfslmsTd, Efslms, Fdefslms, OutputNonlinearity, SecondaryPath};
pub use td::{BlockEflnTd, EflnLms};

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/introduction.md")]
pub mod book_introduction {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/expansion.md")]
pub mod book_expansion {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/overlap_save.md")]
pub mod book_overlap_save {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/fdefln.md")]
pub mod book_fdefln {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/nanc.md")]
pub mod book_nanc {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/analysis.md")]
pub mod book_analysis {}
#[cfg(doctest)]
#[doc = include_str!("../../../README.md")]
pub mod readme {}
