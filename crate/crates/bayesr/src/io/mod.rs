//! File formats: PNG and PFM images, blur-kernel text files, and solver
//! state directories.
//!
//! PNG is the 8-bit interchange format; values are clamped to `[0, 1]` and
//! rounded half to even on write. PFM stores 32-bit floats exactly and is
//! the carrier for solver state. Kernel files are whitespace-separated text
//! so they can be edited by hand.

mod kernel_file;
mod pfm;
mod png;
mod state_dir;

pub use kernel_file::{read_kernel_file, write_kernel_file, KERNEL_SUM_TOLERANCE};
pub use pfm::{read_pfm, write_pfm};
pub use png::{read_png, write_png};
pub use state_dir::{dump_state, load_state, MANIFEST_NAME};
