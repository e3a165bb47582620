//! Thread-local arithmetic-operation counters.
//!
//! The model-fit and TF-merge paths tally their multiplies, adds, divides and
//! shifts here so complexity tables can be produced from the code that
//! actually runs, not from pencil-and-paper estimates. Counters are
//! thread-local, so parallel sweeps never contend or mix tallies.

use std::cell::Cell;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OpCounts {
    pub mults: u64,
    pub adds: u64,
    pub divs: u64,
    pub shifts: u64,
}

thread_local! {
    static MULTS: Cell<u64> = const { Cell::new(0) };
    static ADDS: Cell<u64> = const { Cell::new(0) };
    static DIVS: Cell<u64> = const { Cell::new(0) };
    static SHIFTS: Cell<u64> = const { Cell::new(0) };
}

pub fn reset() {
    MULTS.with(|c| c.set(0));
    ADDS.with(|c| c.set(0));
    DIVS.with(|c| c.set(0));
    SHIFTS.with(|c| c.set(0));
}

pub fn snapshot() -> OpCounts {
    OpCounts {
        mults: MULTS.with(Cell::get),
        adds: ADDS.with(Cell::get),
        divs: DIVS.with(Cell::get),
        shifts: SHIFTS.with(Cell::get),
    }
}

#[inline]
pub fn count_mults(n: u64) {
    MULTS.with(|c| c.set(c.get() + n));
}

#[inline]
pub fn count_adds(n: u64) {
    ADDS.with(|c| c.set(c.get() + n));
}

#[inline]
pub fn count_divs(n: u64) {
    DIVS.with(|c| c.set(c.get() + n));
}

#[inline]
pub fn count_shifts(n: u64) {
    SHIFTS.with(|c| c.set(c.get() + n));
}
