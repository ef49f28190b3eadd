//! Byte budget guarding explicit materialization of long words.

use thiserror::Error;

/// Upper bound on the number of bytes an operation may materialize at once.
///
/// Expansion, word generation and compression inputs are all checked against a
/// budget so that a run-length encoded description of a gigantic word cannot
/// silently turn into a gigantic allocation. The default is 2^31 bytes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ByteBudget(pub u64);

impl ByteBudget {
    pub const DEFAULT: ByteBudget = ByteBudget(1 << 31);

    /// Checks that `required` bytes fit, returning a capacity error otherwise.
    pub fn check(self, required: u128) -> Result<(), CapacityError> {
        if required > self.0 as u128 {
            Err(CapacityError {
                required,
                budget: self.0,
            })
        } else {
            Ok(())
        }
    }
}

impl Default for ByteBudget {
    fn default() -> Self {
        Self::DEFAULT
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("operation needs {required} bytes, which exceeds the byte budget of {budget}")]
pub struct CapacityError {
    pub required: u128,
    pub budget: u64,
}
