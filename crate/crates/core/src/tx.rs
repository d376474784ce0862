//! Transactions, outputs and their canonical binary encoding.
//!
//! The canonical encoding is length-prefixed, fields in declaration order,
//! all integers big-endian:
//!
//! ```text
//! u32 n_inputs  { [u8;32] tx_id  u32 index }*
//! u32 n_outputs { u64 value  u32 len  condition[len] }*
//! u32 len unlock[len]
//! u64 timestamp
//! ```
//!
//! A transaction id is the SHA-256 of that encoding.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::hash::{Hash256, TxId};

/// Reference to the `index`-th output of transaction `tx_id`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct OutputRef {
    #[serde(rename = "tx")]
    pub tx_id: TxId,
    pub index: u32,
}

impl OutputRef {
    pub fn new(tx_id: TxId, index: u32) -> Self {
        Self { tx_id, index }
    }
}

impl fmt::Debug for OutputRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}:{}", self.tx_id, self.index)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Output {
    pub value: u64,
    #[serde(with = "hex_bytes")]
    pub condition: Vec<u8>,
}

impl Output {
    pub fn new(value: u64, condition: impl Into<Vec<u8>>) -> Self {
        Self {
            value,
            condition: condition.into(),
        }
    }
}

/// Per-transaction conflict marker. `Bot` for genesis and every non-conflict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Label {
    Bot,
    Conflict(TxId),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, thiserror::Error)]
#[serde(rename_all = "snake_case")]
pub enum SyntaxError {
    #[error("transaction consumes the same output twice")]
    DuplicateInput,
    #[error("transaction has no outputs")]
    EmptyOutputs,
    #[error("output with zero value")]
    ZeroValue,
    #[error("output values overflow u64")]
    Overflow,
    #[error("non-genesis transaction without unlock data")]
    MissingUnlock,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DecodeError {
    #[error("unexpected end of input at byte {0}")]
    Truncated(usize),
    #[error("{0} trailing bytes after transaction")]
    TrailingBytes(usize),
}

/// An atomic transfer: consumes `inputs`, creates `outputs`.
///
/// Immutable once built; the id is computed at construction.
#[derive(Clone, PartialEq, Eq)]
pub struct Transaction {
    inputs: Vec<OutputRef>,
    outputs: Vec<Output>,
    unlock: Vec<u8>,
    timestamp: u64,
    id: TxId,
}

impl Transaction {
    pub fn new(
        inputs: Vec<OutputRef>,
        outputs: Vec<Output>,
        unlock: impl Into<Vec<u8>>,
        timestamp: u64,
    ) -> Self {
        let mut tx = Transaction {
            inputs,
            outputs,
            unlock: unlock.into(),
            timestamp,
            id: TxId::ZERO,
        };
        tx.id = TxId::digest(&tx.encode());
        tx
    }

    pub fn id(&self) -> TxId {
        self.id
    }

    pub fn inputs(&self) -> &[OutputRef] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[Output] {
        &self.outputs
    }

    pub fn unlock(&self) -> &[u8] {
        &self.unlock
    }

    pub fn timestamp(&self) -> u64 {
        self.timestamp
    }

    pub fn is_genesis(&self) -> bool {
        self.inputs.is_empty()
    }

    pub fn output_ref(&self, index: u32) -> OutputRef {
        OutputRef::new(self.id, index)
    }

    /// Output references produced by this transaction, in order.
    pub fn output_refs(&self) -> impl Iterator<Item = (OutputRef, &Output)> + '_ {
        self.outputs
            .iter()
            .enumerate()
            .map(move |(i, o)| (OutputRef::new(self.id, i as u32), o))
    }

    /// Sum of output values, `None` on overflow.
    pub fn output_sum(&self) -> Option<u64> {
        self.outputs
            .iter()
            .try_fold(0u64, |acc, o| acc.checked_add(o.value))
    }

    /// Ids of the transactions whose outputs this one consumes (deduplicated).
    pub fn parent_ids(&self) -> BTreeSet<TxId> {
        self.inputs.iter().map(|r| r.tx_id).collect()
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(
            16 + self.inputs.len() * 36 + self.outputs.len() * 16 + self.unlock.len(),
        );
        out.extend_from_slice(&(self.inputs.len() as u32).to_be_bytes());
        for input in &self.inputs {
            out.extend_from_slice(input.tx_id.as_bytes());
            out.extend_from_slice(&input.index.to_be_bytes());
        }
        out.extend_from_slice(&(self.outputs.len() as u32).to_be_bytes());
        for output in &self.outputs {
            out.extend_from_slice(&output.value.to_be_bytes());
            put_bytes(&mut out, &output.condition);
        }
        put_bytes(&mut out, &self.unlock);
        out.extend_from_slice(&self.timestamp.to_be_bytes());
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, DecodeError> {
        let mut r = Reader { bytes, pos: 0 };
        let n_inputs = r.u32()? as usize;
        let mut inputs = Vec::with_capacity(n_inputs.min(1024));
        for _ in 0..n_inputs {
            let tx_id = Hash256(r.array::<32>()?);
            let index = r.u32()?;
            inputs.push(OutputRef { tx_id, index });
        }
        let n_outputs = r.u32()? as usize;
        let mut outputs = Vec::with_capacity(n_outputs.min(1024));
        for _ in 0..n_outputs {
            let value = r.u64()?;
            let condition = r.bytes()?;
            outputs.push(Output { value, condition });
        }
        let unlock = r.bytes()?;
        let timestamp = r.u64()?;
        if r.pos != bytes.len() {
            return Err(DecodeError::TrailingBytes(bytes.len() - r.pos));
        }
        Ok(Transaction::new(inputs, outputs, unlock, timestamp))
    }

    /// Structural checks that need no ledger context. Value balance and
    /// unlock matching happen on insertion, where inputs can be resolved.
    pub fn validate_syntax(&self) -> Result<(), SyntaxError> {
        if self.outputs.is_empty() {
            return Err(SyntaxError::EmptyOutputs);
        }
        let mut seen = BTreeSet::new();
        if !self.inputs.iter().all(|r| seen.insert(*r)) {
            return Err(SyntaxError::DuplicateInput);
        }
        if self.outputs.iter().any(|o| o.value == 0) {
            return Err(SyntaxError::ZeroValue);
        }
        if self.output_sum().is_none() {
            return Err(SyntaxError::Overflow);
        }
        if !self.is_genesis() && self.unlock.is_empty() {
            return Err(SyntaxError::MissingUnlock);
        }
        Ok(())
    }
}

impl fmt::Debug for Transaction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Transaction")
            .field("id", &self.id)
            .field("inputs", &self.inputs)
            .field("outputs", &self.outputs)
            .field("timestamp", &self.timestamp)
            .finish()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("genesis needs at least one output")]
pub struct EmptyGenesis;

/// Builds the input-less root transaction.
pub fn make_genesis(outputs: Vec<Output>) -> Result<Transaction, EmptyGenesis> {
    if outputs.is_empty() {
        return Err(EmptyGenesis);
    }
    Ok(Transaction::new(Vec::new(), outputs, Vec::new(), 0))
}

fn put_bytes(out: &mut Vec<u8>, bytes: &[u8]) {
    out.extend_from_slice(&(bytes.len() as u32).to_be_bytes());
    out.extend_from_slice(bytes);
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8], DecodeError> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or(DecodeError::Truncated(self.pos))?;
        let slice = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(slice)
    }

    fn array<const N: usize>(&mut self) -> Result<[u8; N], DecodeError> {
        let mut buf = [0u8; N];
        buf.copy_from_slice(self.take(N)?);
        Ok(buf)
    }

    fn u32(&mut self) -> Result<u32, DecodeError> {
        Ok(u32::from_be_bytes(self.array()?))
    }

    fn u64(&mut self) -> Result<u64, DecodeError> {
        Ok(u64::from_be_bytes(self.array()?))
    }

    fn bytes(&mut self) -> Result<Vec<u8>, DecodeError> {
        let len = self.u32()? as usize;
        Ok(self.take(len)?.to_vec())
    }
}

/// JSON object form used in scenario files.
#[derive(Serialize, Deserialize)]
struct TransactionJson {
    inputs: Vec<OutputRef>,
    outputs: Vec<Output>,
    #[serde(with = "hex_bytes")]
    unlock: Vec<u8>,
    timestamp: u64,
}

impl Serialize for Transaction {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        TransactionJson {
            inputs: self.inputs.clone(),
            outputs: self.outputs.clone(),
            unlock: self.unlock.clone(),
            timestamp: self.timestamp,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Transaction {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let j = TransactionJson::deserialize(deserializer)?;
        Ok(Transaction::new(j.inputs, j.outputs, j.unlock, j.timestamp))
    }
}

mod hex_bytes {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(bytes: &[u8], s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&hex::encode(bytes))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<u8>, D::Error> {
        let s = String::deserialize(d)?;
        hex::decode(s).map_err(serde::de::Error::custom)
    }
}
