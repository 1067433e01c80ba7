//! A minimal stack machine whose shortest programs define a computable
//! complexity.
//!
//! A program is a bit string read in groups of three; the first character
//! of a group is the most significant bit of its opcode.
//!
//! | code | op         | effect                                                   |
//! |------|------------|----------------------------------------------------------|
//! | 000  | push0      | push 0                                                   |
//! | 001  | push1      | push 1                                                   |
//! | 010  | dup        | push a copy of the top                                   |
//! | 011  | drop       | pop                                                      |
//! | 100  | output     | pop and append to the output                             |
//! | 101  | loop-start | if the stack is empty or its top is 0, jump past the matching loop-end |
//! | 110  | loop-end   | jump back to the matching loop-start                     |
//! | 111  | halt       | stop                                                     |
//!
//! Running off the end of the program also halts. Popping an empty stack
//! crashes. Every executed instruction costs one step; running out of steps
//! is a timeout. Programs whose length is not a multiple of three, or whose
//! loop brackets do not match, never halt. Outputs longer than 64 bits are
//! discarded. A program has length at least one.

use std::collections::HashMap;

use serde_json::json;

use super::{Complexity, ComplexityOracle};
use crate::bits::{Bits, MAX_BITS};
use crate::error::{capacity, Result};
use crate::par::Exec;

pub const DEFAULT_STEP_BUDGET: u64 = 10_000;
pub const MAX_PROGRAM_CAP: u32 = 18;
pub const MAX_STEP_BUDGET: u64 = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Op {
    Push0,
    Push1,
    Dup,
    Drop,
    Output,
    LoopStart,
    LoopEnd,
    Halt,
}

impl Op {
    fn decode(code: u8) -> Op {
        match code {
            0 => Op::Push0,
            1 => Op::Push1,
            2 => Op::Dup,
            3 => Op::Drop,
            4 => Op::Output,
            5 => Op::LoopStart,
            6 => Op::LoopEnd,
            _ => Op::Halt,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RunOutcome {
    Halted(Bits),
    Crashed,
    Timeout,
    Malformed,
    OutputOverflow,
}

fn decode(program: Bits) -> Option<Vec<Op>> {
    if !program.len().is_multiple_of(3) {
        return None;
    }
    Some(
        (0..program.len() / 3)
            .map(|g| {
                let b = |i| u8::from(program.bit(3 * g + i));
                Op::decode(b(0) << 2 | b(1) << 1 | b(2))
            })
            .collect(),
    )
}

fn match_brackets(ops: &[Op]) -> Option<Vec<usize>> {
    let mut partner = vec![usize::MAX; ops.len()];
    let mut open = Vec::new();
    for (i, op) in ops.iter().enumerate() {
        match op {
            Op::LoopStart => open.push(i),
            Op::LoopEnd => {
                let j = open.pop()?;
                partner[i] = j;
                partner[j] = i;
            }
            _ => {}
        }
    }
    open.is_empty().then_some(partner)
}

pub fn run_program(program: Bits, step_budget: u64) -> RunOutcome {
    let Some(ops) = decode(program) else { return RunOutcome::Malformed };
    let Some(partner) = match_brackets(&ops) else { return RunOutcome::Malformed };
    let mut stack: Vec<bool> = Vec::new();
    let (mut out, mut out_len) = (0u64, 0u32);
    let (mut pc, mut steps) = (0usize, 0u64);
    while pc < ops.len() {
        if steps == step_budget {
            return RunOutcome::Timeout;
        }
        steps += 1;
        match ops[pc] {
            Op::Push0 => stack.push(false),
            Op::Push1 => stack.push(true),
            Op::Dup => match stack.last() {
                Some(&top) => stack.push(top),
                None => return RunOutcome::Crashed,
            },
            Op::Drop => {
                if stack.pop().is_none() {
                    return RunOutcome::Crashed;
                }
            }
            Op::Output => {
                let Some(bit) = stack.pop() else { return RunOutcome::Crashed };
                if out_len == MAX_BITS {
                    return RunOutcome::OutputOverflow;
                }
                out |= u64::from(bit) << out_len;
                out_len += 1;
            }
            Op::LoopStart => {
                if !stack.last().copied().unwrap_or(false) {
                    pc = partner[pc];
                }
            }
            Op::LoopEnd => {
                pc = partner[pc];
                continue;
            }
            Op::Halt => break,
        }
        pc += 1;
    }
    RunOutcome::Halted(Bits::truncating(out, out_len))
}

pub fn program_from_binary(s: &str) -> Result<Bits> {
    Bits::parse_binary(s)
}

fn check_caps(cap: u32, step_budget: u64) -> Result<()> {
    if cap > MAX_PROGRAM_CAP {
        return Err(capacity(format!("program cap {cap} exceeds {MAX_PROGRAM_CAP}")));
    }
    if step_budget > MAX_STEP_BUDGET {
        return Err(capacity(format!("step budget {step_budget} exceeds {MAX_STEP_BUDGET}")));
    }
    Ok(())
}

/// Outputs of all programs of length `len`, in program order.
fn outputs_of_length(len: u32, step_budget: u64, exec: Exec) -> Vec<Option<Bits>> {
    if !len.is_multiple_of(3) {
        return Vec::new();
    }
    exec.map(1usize << len, |p| match run_program(Bits::truncating(p as u64, len), step_budget) {
        RunOutcome::Halted(out) => Some(out),
        _ => None,
    })
}

/// Every output of a program of length `<= cap`, mapped to the shortest
/// such length.
pub fn enumerate_programs(cap: u32, step_budget: u64, exec: Exec) -> Result<HashMap<Bits, u32>> {
    check_caps(cap, step_budget)?;
    let mut best = HashMap::new();
    for len in 1..=cap {
        for out in outputs_of_length(len, step_budget, exec).into_iter().flatten() {
            best.entry(out).or_insert(len);
        }
    }
    Ok(best)
}

/// Shortest program of length `<= cap` printing `x` within `step_budget`
/// steps.
pub fn toy_complexity(x: Bits, cap: u32, step_budget: u64) -> Result<Complexity> {
    check_caps(cap, step_budget)?;
    for len in 1..=cap {
        if outputs_of_length(len, step_budget, Exec::default()).contains(&Some(x)) {
            return Ok(Complexity::Finite(len));
        }
    }
    Ok(Complexity::Infinite)
}

/// [`toy_complexity`] for every string, tabulated once.
#[derive(Clone, Debug)]
pub struct ToyOracle {
    cap: u32,
    step_budget: u64,
    table: HashMap<Bits, u32>,
}

impl ToyOracle {
    pub fn new(cap: u32, step_budget: u64) -> Result<Self> {
        Self::with_exec(cap, step_budget, Exec::default())
    }

    pub fn with_exec(cap: u32, step_budget: u64, exec: Exec) -> Result<Self> {
        Ok(ToyOracle { cap, step_budget, table: enumerate_programs(cap, step_budget, exec)? })
    }

    pub fn cap(&self) -> u32 {
        self.cap
    }

    pub fn step_budget(&self) -> u64 {
        self.step_budget
    }

    /// Number of strings of length `n` with complexity `<= k`.
    pub fn count(&self, n: u32, k: u32) -> u64 {
        self.table.iter().filter(|(x, c)| x.len() == n && **c <= k).count() as u64
    }
}

impl ComplexityOracle for ToyOracle {
    fn name(&self) -> &str {
        "toy"
    }

    fn complexity(&self, x: Bits) -> Result<Complexity> {
        Ok(self.table.get(&x).map_or(Complexity::Infinite, |&c| Complexity::Finite(c)))
    }

    fn members(&self, n: u32, k: u32) -> Result<Option<Vec<Bits>>> {
        let mut out: Vec<Bits> = self.table.iter().filter(|(x, c)| x.len() == n && **c <= k).map(|(x, _)| *x).collect();
        out.sort_unstable();
        Ok(Some(out))
    }

    fn caps(&self) -> serde_json::Value {
        json!({ "program_cap": self.cap, "step_budget": self.step_budget })
    }
}
