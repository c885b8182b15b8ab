//! Variables, tracks and symbols.
//!
//! A [`Symbol`] is a partial assignment of tracks to bits. Tracks that are not
//! in the `care` mask are "don't care": the symbol stands for every total
//! assignment that agrees with `value` on the cared tracks.

use std::fmt;

use rustc_hash::FxHashMap;
use thiserror::Error;

/// Upper bound on the number of tracks; symbols are packed into a `u64`.
pub const MAX_TRACKS: usize = 64;

/// Default cap on the number of don't-care tracks [`concretize`] will expand.
pub const DEFAULT_CONCRETIZE_CAP: u32 = 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlphabetError {
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("duplicate variable `{0}`")]
    DuplicateVariable(String),
    #[error("at most {MAX_TRACKS} variables are supported")]
    TooManyVariables,
    #[error("symbol has {count} don't-care tracks, expansion cap is {cap}")]
    TooManyDontCares { count: u32, cap: u32 },
}

/// Ordered set of variable names; the position of a name is its track.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct VarTable {
    names: Vec<String>,
    index: FxHashMap<String, usize>,
}

impl VarTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_names<I, S>(names: I) -> Result<Self, AlphabetError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut table = Self::new();
        for name in names {
            let name = name.into();
            if table.index.contains_key(&name) {
                return Err(AlphabetError::DuplicateVariable(name));
            }
            table.push(name)?;
        }
        Ok(table)
    }

    /// Adds `name` if absent and returns its track.
    pub fn intern(&mut self, name: &str) -> Result<usize, AlphabetError> {
        match self.index.get(name) {
            Some(&track) => Ok(track),
            None => self.push(name.to_string()),
        }
    }

    fn push(&mut self, name: String) -> Result<usize, AlphabetError> {
        if self.names.len() >= MAX_TRACKS {
            return Err(AlphabetError::TooManyVariables);
        }
        let track = self.names.len();
        self.index.insert(name.clone(), track);
        self.names.push(name);
        Ok(track)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, track: usize) -> &str {
        &self.names[track]
    }

    pub fn track(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.index.contains_key(name)
    }

    pub fn is_subset_of(&self, other: &VarTable) -> bool {
        self.names.iter().all(|n| other.contains(n))
    }

    /// Bit mask with one bit per track.
    pub fn full_mask(&self) -> u64 {
        mask_of_width(self.len())
    }

    /// Bit mask of the tracks of `vars`.
    pub fn mask_of<S: AsRef<str>>(&self, vars: &[S]) -> Result<u64, AlphabetError> {
        let mut mask = 0;
        for v in vars {
            let track = self
                .track(v.as_ref())
                .ok_or_else(|| AlphabetError::UnknownVariable(v.as_ref().to_string()))?;
            mask |= 1 << track;
        }
        Ok(mask)
    }
}

pub(crate) fn mask_of_width(width: usize) -> u64 {
    if width >= 64 {
        u64::MAX
    } else {
        (1u64 << width) - 1
    }
}

/// A symbol with don't-care compression. Invariant: `value & !care == 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Symbol {
    care: u64,
    value: u64,
}

impl Symbol {
    pub fn new(care: u64, value: u64) -> Self {
        Symbol {
            care,
            value: value & care,
        }
    }

    /// The fully cared symbol over `width` tracks with the given bits.
    pub fn total(width: usize, value: u64) -> Self {
        Symbol::new(mask_of_width(width), value)
    }

    /// The symbol that cares about nothing (denotes every assignment).
    pub fn any() -> Self {
        Symbol { care: 0, value: 0 }
    }

    pub fn care(self) -> u64 {
        self.care
    }

    pub fn value(self) -> u64 {
        self.value
    }

    pub fn dont_care_count(self, width: usize) -> u32 {
        (mask_of_width(width) & !self.care).count_ones()
    }

    /// Whether the two symbols share at least one concrete assignment.
    pub fn compatible(self, other: Symbol) -> bool {
        (self.value ^ other.value) & self.care & other.care == 0
    }

    /// The symbol denoting the intersection of both denotations, if non-empty.
    pub fn meet(self, other: Symbol) -> Option<Symbol> {
        self.compatible(other).then_some(Symbol {
            care: self.care | other.care,
            value: self.value | other.value,
        })
    }

    /// Whether every assignment denoted by `self` is denoted by `other`.
    pub fn refines(self, other: Symbol) -> bool {
        other.care & !self.care == 0 && (self.value ^ other.value) & other.care == 0
    }

    pub fn bit(self, track: usize) -> Option<bool> {
        (self.care >> track & 1 == 1).then(|| self.value >> track & 1 == 1)
    }

    /// Drops the tracks in `mask` from the care set.
    pub fn forget(self, mask: u64) -> Symbol {
        Symbol::new(self.care & !mask, self.value)
    }

    /// All symbols obtained by fixing every track of `block` to 0 or 1 (the
    /// explicit inverse projection, performed in place on a shared table).
    pub fn expand_block(self, block: u64) -> impl Iterator<Item = Symbol> {
        let free = block & !self.care;
        let base = self;
        SubmaskIter::new(free).map(move |bits| Symbol {
            care: base.care | free,
            value: base.value | bits,
        })
    }

    /// Renders as `⟨X1↦0,X2↦?⟩` over `table`.
    pub fn render(self, table: &VarTable) -> String {
        let parts: Vec<String> = (0..table.len())
            .map(|t| {
                let bit = match self.bit(t) {
                    Some(true) => "1",
                    Some(false) => "0",
                    None => "?",
                };
                format!("{}↦{}", table.name(t), bit)
            })
            .collect();
        format!("⟨{}⟩", parts.join(","))
    }
}

/// Iterates over all submasks of a mask, starting from 0.
pub(crate) struct SubmaskIter {
    mask: u64,
    next: Option<u64>,
}

impl SubmaskIter {
    pub(crate) fn new(mask: u64) -> Self {
        SubmaskIter {
            mask,
            next: Some(0),
        }
    }
}

impl Iterator for SubmaskIter {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        let current = self.next?;
        self.next = if current == self.mask {
            None
        } else {
            Some((current.wrapping_sub(self.mask)) & self.mask)
        };
        Some(current)
    }
}

/// Symbol mapping every track of `vars` to 0.
pub fn zero_symbol(vars: &VarTable) -> Symbol {
    Symbol::new(vars.full_mask(), 0)
}

/// Removal of a variable block from a table, with the induced re-indexing.
#[derive(Debug, Clone)]
pub struct Projection {
    full: VarTable,
    reduced: VarTable,
    block_mask: u64,
    /// `kept[i]` is the full-table track of reduced track `i`.
    kept: Vec<usize>,
}

impl Projection {
    pub fn new<S: AsRef<str>>(full: &VarTable, block: &[S]) -> Result<Self, AlphabetError> {
        let block_mask = full.mask_of(block)?;
        let kept: Vec<usize> = (0..full.len())
            .filter(|t| block_mask >> t & 1 == 0)
            .collect();
        let reduced = VarTable::from_names(kept.iter().map(|&t| full.name(t).to_string()))?;
        Ok(Projection {
            full: full.clone(),
            reduced,
            block_mask,
            kept,
        })
    }

    pub fn full(&self) -> &VarTable {
        &self.full
    }

    pub fn reduced(&self) -> &VarTable {
        &self.reduced
    }

    pub fn block_mask(&self) -> u64 {
        self.block_mask
    }

    /// Restricts a full-table symbol to the reduced table.
    pub fn project(&self, s: Symbol) -> Symbol {
        let mut care = 0;
        let mut value = 0;
        for (i, &t) in self.kept.iter().enumerate() {
            care |= (s.care >> t & 1) << i;
            value |= (s.value >> t & 1) << i;
        }
        Symbol::new(care, value)
    }

    /// Lifts a reduced-table symbol to the full table, leaving block tracks
    /// as don't-care.
    pub fn lift(&self, t: Symbol) -> Symbol {
        let mut care = 0;
        let mut value = 0;
        for (i, &track) in self.kept.iter().enumerate() {
            care |= (t.care >> i & 1) << track;
            value |= (t.value >> i & 1) << track;
        }
        Symbol::new(care, value)
    }

    /// Every full-table symbol that projects to `t`, with each block track
    /// fixed to 0 or 1.
    pub fn inverse(&self, t: Symbol) -> Vec<Symbol> {
        self.lift(t).expand_block(self.block_mask).collect()
    }

    /// The inverse projection as a single symbol with don't-care block tracks.
    pub fn inverse_compressed(&self, t: Symbol) -> Symbol {
        self.lift(t)
    }
}

/// Restricts `s` (over `table`) to the tracks outside `block`.
pub fn project_symbol<S: AsRef<str>>(
    s: Symbol,
    table: &VarTable,
    block: &[S],
) -> Result<Symbol, AlphabetError> {
    Ok(Projection::new(table, block)?.project(s))
}

/// All total assignments over `width` tracks denoted by `s`.
pub fn concretize(s: Symbol, width: usize, cap: u32) -> Result<Vec<Symbol>, AlphabetError> {
    let free = mask_of_width(width) & !s.care;
    let count = free.count_ones();
    if count > cap {
        return Err(AlphabetError::TooManyDontCares { count, cap });
    }
    Ok(s.expand_block(free).collect())
}

/// All total symbols over `width` tracks, in increasing value order.
pub fn all_symbols(width: usize) -> impl Iterator<Item = Symbol> {
    let care = mask_of_width(width);
    SubmaskIter::new(care).map(move |value| Symbol { care, value })
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "⟨")?;
        let width = 64 - self.care.leading_zeros() as usize;
        for t in 0..width {
            match self.bit(t) {
                Some(true) => write!(f, "1")?,
                Some(false) => write!(f, "0")?,
                None => write!(f, "?")?,
            }
        }
        write!(f, "⟩")
    }
}
