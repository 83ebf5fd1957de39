//! Lookup tables driving Rice parameter, zero-position (V) and
//! dependent-quantization state derivation.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

/// Saturated local sums live in `[0, SUM_RANGE)`.
pub const SUM_RANGE: usize = 32;
pub const V_ROWS: usize = 3;
pub const NUM_STATES: usize = 4;

const DEFAULT_TABLES: &str = include_str!("../../data/vtm6_tables.json");

#[derive(Debug, Error)]
pub enum TableError {
    #[error("table file does not parse: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("unsupported table file version {0}")]
    Version(u32),
    #[error("riceArr entry {index} = {value} is outside 0..=3")]
    RiceValue { index: usize, value: u8 },
    #[error("riceArr is not non-decreasing at index {0}")]
    RiceNotMonotone(usize),
    #[error("VArr row {row}: value {value} has a non-contiguous preimage")]
    VNotContiguous { row: usize, value: u32 },
    #[error("stateTrans entry ({state}, {parity}) = {value} is not a state")]
    StateValue { state: usize, parity: usize, value: u8 },
    #[error("stateRow entry {state} = {value} is not a VArr row")]
    StateRow { state: usize, value: u8 },
    #[error("table digest mismatch: file says {stored}, contents hash to {computed}")]
    Digest { stored: String, computed: String },
}

/// Closed interval of saturated sums.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SumInterval {
    pub lo: u32,
    pub hi: u32,
}

impl SumInterval {
    pub fn contains(&self, s: u32) -> bool {
        (self.lo..=self.hi).contains(&s)
    }
}

/// Serialized form of [`CodingTables`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableFile {
    pub version: u32,
    pub name: String,
    pub rice_arr: Vec<u8>,
    pub v_arr: Vec<Vec<u32>>,
    pub state_trans: Vec<[u8; 2]>,
    /// Maps each of the four states onto a `v_arr` row.
    pub state_row: Vec<u8>,
    pub digest: String,
}

#[derive(Serialize)]
struct DigestBody<'a> {
    rice_arr: &'a [u8],
    v_arr: &'a [[u32; SUM_RANGE]; V_ROWS],
    state_trans: &'a [[u8; 2]; NUM_STATES],
    state_row: &'a [u8; NUM_STATES],
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CodingTables {
    name: String,
    rice_arr: [u8; SUM_RANGE],
    v_arr: [[u32; SUM_RANGE]; V_ROWS],
    state_trans: [[u8; 2]; NUM_STATES],
    state_row: [u8; NUM_STATES],
    rice_intervals: [Option<SumInterval>; 4],
    v_intervals: [BTreeMap<u32, SumInterval>; V_ROWS],
    digest: [u8; 32],
}

fn to_array<T: Copy + Default, const N: usize>(v: &[T], what: &str) -> Result<[T; N], TableError> {
    v.try_into().map_err(|_| {
        TableError::Parse(serde::de::Error::custom(format!(
            "{what}: expected {N} entries, found {}",
            v.len()
        )))
    })
}

impl CodingTables {
    pub fn new(
        name: impl Into<String>,
        rice_arr: [u8; SUM_RANGE],
        v_arr: [[u32; SUM_RANGE]; V_ROWS],
        state_trans: [[u8; 2]; NUM_STATES],
        state_row: [u8; NUM_STATES],
    ) -> Result<Self, TableError> {
        for (index, &value) in rice_arr.iter().enumerate() {
            if value > 3 {
                return Err(TableError::RiceValue { index, value });
            }
            if index > 0 && value < rice_arr[index - 1] {
                return Err(TableError::RiceNotMonotone(index));
            }
        }
        for (state, row) in state_trans.iter().enumerate() {
            for (parity, &value) in row.iter().enumerate() {
                if usize::from(value) >= NUM_STATES {
                    return Err(TableError::StateValue { state, parity, value });
                }
            }
        }
        for (state, &value) in state_row.iter().enumerate() {
            if usize::from(value) >= V_ROWS {
                return Err(TableError::StateRow { state, value });
            }
        }

        let mut rice_intervals = [None; 4];
        for (rice, slot) in rice_intervals.iter_mut().enumerate() {
            *slot = preimage(&rice_arr, |r| usize::from(r) == rice).map_err(|_| TableError::RiceNotMonotone(0))?;
        }
        let mut v_intervals: [BTreeMap<u32, SumInterval>; V_ROWS] = Default::default();
        for (row, map) in v_intervals.iter_mut().enumerate() {
            let values: std::collections::BTreeSet<u32> = v_arr[row].iter().copied().collect();
            for value in values {
                let iv = preimage(&v_arr[row], |v| v == value)
                    .map_err(|_| TableError::VNotContiguous { row, value })?
                    .expect("value occurs in its own row");
                map.insert(value, iv);
            }
        }

        let body = DigestBody {
            rice_arr: &rice_arr,
            v_arr: &v_arr,
            state_trans: &state_trans,
            state_row: &state_row,
        };
        let canonical = serde_json::to_vec(&body).expect("tables serialize");
        let digest: [u8; 32] = Sha256::digest(&canonical).into();

        Ok(Self {
            name: name.into(),
            rice_arr,
            v_arr,
            state_trans,
            state_row,
            rice_intervals,
            v_intervals,
            digest,
        })
    }

    /// Parses a table file and checks its digest.
    pub fn from_json(text: &str) -> Result<Self, TableError> {
        let file: TableFile = serde_json::from_str(text)?;
        Self::from_file(&file)
    }

    pub fn from_file(file: &TableFile) -> Result<Self, TableError> {
        if file.version != 1 {
            return Err(TableError::Version(file.version));
        }
        let v_rows: Vec<[u32; SUM_RANGE]> = file
            .v_arr
            .iter()
            .map(|r| to_array::<u32, SUM_RANGE>(r, "v_arr row"))
            .collect::<Result<_, _>>()?;
        let tables = Self::new(
            file.name.clone(),
            to_array(&file.rice_arr, "rice_arr")?,
            to_array(&v_rows, "v_arr")?,
            to_array(&file.state_trans, "state_trans")?,
            to_array(&file.state_row, "state_row")?,
        )?;
        let computed = tables.digest_hex();
        if !computed.eq_ignore_ascii_case(&file.digest) {
            return Err(TableError::Digest {
                stored: file.digest.clone(),
                computed,
            });
        }
        Ok(tables)
    }

    pub fn to_file(&self) -> TableFile {
        TableFile {
            version: 1,
            name: self.name.clone(),
            rice_arr: self.rice_arr.to_vec(),
            v_arr: self.v_arr.iter().map(|r| r.to_vec()).collect(),
            state_trans: self.state_trans.to_vec(),
            state_row: self.state_row.to_vec(),
            digest: self.digest_hex(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("tables serialize")
    }

    /// The tables shipped with the crate, taken from the VVC reference model.
    pub fn vtm_default() -> Self {
        Self::from_json(DEFAULT_TABLES).expect("shipped tables are valid")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn digest(&self) -> [u8; 32] {
        self.digest
    }

    pub fn digest_hex(&self) -> String {
        hex::encode(self.digest)
    }

    pub fn rice_arr(&self) -> &[u8; SUM_RANGE] {
        &self.rice_arr
    }

    pub fn v_arr(&self) -> &[[u32; SUM_RANGE]; V_ROWS] {
        &self.v_arr
    }

    pub fn rice(&self, sum: u32) -> u32 {
        u32::from(self.rice_arr[sum as usize])
    }

    pub fn state_row(&self, state: u8) -> usize {
        usize::from(self.state_row[usize::from(state)])
    }

    pub fn v_for_row(&self, row: usize, sum: u32) -> u32 {
        self.v_arr[row][sum as usize]
    }

    pub fn v(&self, state: u8, sum: u32) -> u32 {
        self.v_for_row(self.state_row(state), sum)
    }

    pub fn next_state(&self, state: u8, parity: u8) -> u8 {
        self.state_trans[usize::from(state)][usize::from(parity & 1)]
    }

    /// `I_R`: the sums mapping to `rice`, if any.
    pub fn rice_interval(&self, rice: u32) -> Option<SumInterval> {
        self.rice_intervals.get(rice as usize).copied().flatten()
    }

    /// Number of distinct Rice values present in the table.
    pub fn rice_levels(&self) -> usize {
        self.rice_intervals.iter().filter(|i| i.is_some()).count()
    }

    /// `I_P`: the sums of `row` mapping to `v`, if any.
    pub fn v_interval(&self, row: usize, v: u32) -> Option<SumInterval> {
        self.v_intervals[row].get(&v).copied()
    }
}

/// Contiguous preimage of `pred` over a table, `Err` if it is split.
fn preimage<T: Copy>(table: &[T], pred: impl Fn(T) -> bool) -> Result<Option<SumInterval>, ()> {
    let hits: Vec<usize> = (0..table.len()).filter(|&i| pred(table[i])).collect();
    match (hits.first(), hits.last()) {
        (Some(&lo), Some(&hi)) if hi - lo + 1 == hits.len() => Ok(Some(SumInterval {
            lo: lo as u32,
            hi: hi as u32,
        })),
        (None, None) => Ok(None),
        _ => Err(()),
    }
}
