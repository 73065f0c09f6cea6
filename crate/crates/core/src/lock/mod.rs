//! Locking techniques behind one entry point, [`lock`].
//!
//! Hard-coded techniques plant a secret pattern in a point function; the
//! key-gate techniques join a two-bin key-controlled unit to one output.

mod hc;
mod nhc;
mod tree;

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::netlist::{Circuit, NetId, NetlistError, PortRoles};
use crate::sat::{check_equivalence, substitute_key, SatError};
use crate::sim::{eval_words, TernaryPattern};

pub use hc::perturbed_circuit;
pub use tree::DtlGate;

#[derive(Debug, Error)]
pub enum LockError {
    #[error("key size {0} is not valid for {1}")]
    KeySize(usize, Technique),
    #[error("need {need} eligible inputs, circuit has {have}")]
    InsufficientInputs { need: usize, have: usize },
    #[error("output {0} has a constant or port-driven cone")]
    DegeneratePop(String),
    #[error("unknown port {0}")]
    UnknownPort(String),
    #[error("bad option: {0}")]
    BadOption(String),
    #[error("key space of {0} bits is too large to enumerate")]
    TooLarge(usize),
    #[error(transparent)]
    Netlist(#[from] NetlistError),
    #[error(transparent)]
    Sat(#[from] SatError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Technique {
    Sarlock,
    SarlockDtl,
    SfllHd0,
    SfllFlex,
    SfllRem,
    Cac,
    CacDtl,
    Ece,
    AntiSat,
    AntiSatDtl,
    Caslock,
    Sas,
    GenAntiSatComp,
    GenAntiSatNoncomp,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    HardCoded,
    KeyGate,
}

impl Technique {
    pub const ALL: [Technique; 14] = [
        Technique::Sarlock,
        Technique::SarlockDtl,
        Technique::SfllHd0,
        Technique::SfllFlex,
        Technique::SfllRem,
        Technique::Cac,
        Technique::CacDtl,
        Technique::Ece,
        Technique::AntiSat,
        Technique::AntiSatDtl,
        Technique::Caslock,
        Technique::Sas,
        Technique::GenAntiSatComp,
        Technique::GenAntiSatNoncomp,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Technique::Sarlock => "sarlock",
            Technique::SarlockDtl => "sarlock-dtl",
            Technique::SfllHd0 => "sfll-hd0",
            Technique::SfllFlex => "sfll-flex",
            Technique::SfllRem => "sfll-rem",
            Technique::Cac => "cac",
            Technique::CacDtl => "cac-dtl",
            Technique::Ece => "ece",
            Technique::AntiSat => "anti-sat",
            Technique::AntiSatDtl => "anti-sat-dtl",
            Technique::Caslock => "caslock",
            Technique::Sas => "sas",
            Technique::GenAntiSatComp => "gen-anti-sat-comp",
            Technique::GenAntiSatNoncomp => "gen-anti-sat-noncomp",
        }
    }

    pub fn family(self) -> Family {
        match self {
            Technique::AntiSat
            | Technique::AntiSatDtl
            | Technique::Caslock
            | Technique::Sas
            | Technique::GenAntiSatComp
            | Technique::GenAntiSatNoncomp => Family::KeyGate,
            _ => Family::HardCoded,
        }
    }

    /// The secret sits on key inputs rather than primary inputs.
    pub fn pattern_on_keys(self) -> bool {
        matches!(self, Technique::Sarlock | Technique::SarlockDtl | Technique::Ece)
    }

    pub fn is_dtl(self) -> bool {
        matches!(self, Technique::SarlockDtl | Technique::CacDtl | Technique::AntiSatDtl)
    }
}

impl fmt::Display for Technique {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Technique {
    type Err = LockError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm: String = s
            .to_ascii_lowercase()
            .chars()
            .map(|c| if c == '_' { '-' } else { c })
            .collect();
        let norm = match norm.as_str() {
            "sfll-hd" | "sfll" => "sfll-hd0".to_string(),
            "antisat" => "anti-sat".to_string(),
            "antisat-dtl" => "anti-sat-dtl".to_string(),
            _ => norm,
        };
        Technique::ALL
            .into_iter()
            .find(|t| t.name() == norm)
            .ok_or_else(|| LockError::BadOption(format!("unknown technique {s}")))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LockSpec {
    pub technique: Technique,
    pub key_size: usize,
    /// Protected patterns for SFLL-flex; the key holds one word per pattern.
    pub num_pp: Option<usize>,
    /// First-level comparator gates to diversify in DTL variants.
    pub dtl_replacements: Option<usize>,
    pub dtl_gate: DtlGate,
    pub sas_blocks: usize,
    /// Comparator bits ignored by ECE; each wrong key corrupts 2^radius patterns.
    pub ece_radius: usize,
    pub seed: u64,
    pub pip: Option<Vec<String>>,
    pub pop: Option<Vec<String>>,
    /// Planted key; drawn from the seed when absent.
    pub key: Option<Vec<bool>>,
}

impl LockSpec {
    pub fn new(technique: Technique, key_size: usize, seed: u64) -> Self {
        LockSpec {
            technique,
            key_size,
            num_pp: None,
            dtl_replacements: None,
            dtl_gate: DtlGate::Or,
            sas_blocks: 4,
            ece_radius: 1,
            seed,
            pip: None,
            pop: None,
            key: None,
        }
    }

    /// Number of protected patterns the hard-coded construction plants.
    pub fn effective_num_pp(&self) -> usize {
        match self.technique {
            Technique::SfllFlex => self.num_pp.unwrap_or(if self.key_size >= 16 {
                self.key_size / 8
            } else {
                2
            }),
            _ => 1,
        }
    }
}

#[derive(Clone, Debug)]
pub struct LockArtifact {
    pub locked: Circuit,
    pub secret_key: Vec<bool>,
    pub roles: PortRoles,
    /// Hard-coded family: the planted patterns, over the PIPs (or the key
    /// inputs for SARLock-style techniques).
    pub protected_patterns: Vec<Vec<bool>>,
    pub spec: LockSpec,
    /// Key-gate family: K1 xor K2 per unit, the invariant of every correct key.
    pub mapping: Vec<bool>,
}

impl LockArtifact {
    pub fn manifest(&self, circuit: &str) -> Manifest {
        Manifest {
            schema: MANIFEST_SCHEMA,
            circuit: circuit.to_string(),
            technique: self.spec.technique,
            seed: self.spec.seed,
            key_size: self.spec.key_size,
            num_pp: self.spec.effective_num_pp(),
            dtl_replacements: self.spec.dtl_replacements,
            sas_blocks: (self.spec.technique == Technique::Sas).then_some(self.spec.sas_blocks),
            roles: self.roles.clone(),
            notes: match self.spec.technique {
                Technique::GenAntiSatNoncomp => Some("f is an independent point-function tree".into()),
                Technique::SfllRem => Some("modified cone resynthesized".into()),
                _ => None,
            },
        }
    }

    pub fn secrets(&self) -> Secrets {
        Secrets {
            key: bits_to_string(&self.secret_key),
            protected_patterns: self.protected_patterns.iter().map(|p| bits_to_string(p)).collect(),
            mapping: (!self.mapping.is_empty()).then(|| bits_to_string(&self.mapping)),
        }
    }
}

pub const MANIFEST_SCHEMA: u32 = 1;

/// Public description of a locked instance.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema: u32,
    pub circuit: String,
    pub technique: Technique,
    pub seed: u64,
    pub key_size: usize,
    pub num_pp: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub dtl_replacements: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub sas_blocks: Option<usize>,
    pub roles: PortRoles,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub notes: Option<String>,
}

/// Everything that must stay out of a published corpus.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Secrets {
    pub key: String,
    pub protected_patterns: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub mapping: Option<String>,
}

pub fn bits_to_string(b: &[bool]) -> String {
    b.iter().map(|v| if *v { '1' } else { '0' }).collect()
}

pub fn parse_bits(s: &str) -> Option<Vec<bool>> {
    s.trim()
        .chars()
        .filter(|c| !c.is_whitespace() && *c != '_')
        .map(|c| match c {
            '0' => Some(false),
            '1' => Some(true),
            _ => None,
        })
        .collect()
}

pub(crate) struct Ctx<'a> {
    pub c: &'a Circuit,
    pub spec: &'a LockSpec,
    pub rng: ChaCha8Rng,
}

impl Ctx<'_> {
    pub fn random_bits(&mut self, n: usize) -> Vec<bool> {
        (0..n).map(|_| self.rng.gen()).collect()
    }

    pub fn planted_key(&mut self) -> Result<Vec<bool>, LockError> {
        match &self.spec.key {
            Some(k) if k.len() == self.spec.key_size => Ok(k.clone()),
            Some(k) => Err(LockError::BadOption(format!(
                "planted key has {} bits, key size is {}",
                k.len(),
                self.spec.key_size
            ))),
            None => Ok(self.random_bits(self.spec.key_size)),
        }
    }

    /// `n` protected inputs: the explicit list, or a seeded sample.
    pub fn pick_pips(&mut self, n: usize) -> Result<Vec<String>, LockError> {
        let c = self.c;
        if let Some(list) = &self.spec.pip {
            if list.len() != n {
                return Err(LockError::BadOption(format!("expected {n} PIPs, got {}", list.len())));
            }
            for p in list {
                match c.net(p) {
                    Some(id) if c.is_input(id) => {}
                    _ => return Err(LockError::UnknownPort(p.clone())),
                }
            }
            return Ok(list.clone());
        }
        if c.inputs().len() < n {
            return Err(LockError::InsufficientInputs {
                need: n,
                have: c.inputs().len(),
            });
        }
        let picked: Vec<NetId> = c.inputs().choose_multiple(&mut self.rng, n).copied().collect();
        Ok(picked.into_iter().map(|p| c.net_name(p).to_string()).collect())
    }

    /// `n` protected outputs: the explicit list, or the outputs with the
    /// largest fanin cones.
    pub fn pick_pops(&mut self, n: usize) -> Result<Vec<String>, LockError> {
        let c = self.c;
        if let Some(list) = &self.spec.pop {
            if list.len() < n {
                return Err(LockError::BadOption(format!("expected {n} POPs, got {}", list.len())));
            }
            for p in list.iter().take(n) {
                match c.net(p) {
                    Some(id) if c.is_output(id) => {}
                    _ => return Err(LockError::UnknownPort(p.clone())),
                }
            }
            return Ok(list[..n].to_vec());
        }
        let mut scored: Vec<(usize, usize, NetId)> = c
            .outputs()
            .iter()
            .enumerate()
            .filter(|(_, o)| c.driver(**o).is_some())
            .map(|(i, o)| (c.fanin_mask(*o).iter().filter(|b| **b).count(), i, *o))
            .collect();
        scored.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
        scored.dedup_by_key(|s| s.2);
        if scored.len() < n {
            return Err(LockError::DegeneratePop(format!("{} gate-driven outputs available", scored.len())));
        }
        Ok(scored[..n].iter().map(|s| c.net_name(s.2).to_string()).collect())
    }
}

/// Locks `original` according to `spec`.
pub fn lock(original: &Circuit, spec: &LockSpec) -> Result<LockArtifact, LockError> {
    if spec.key_size == 0 {
        return Err(LockError::KeySize(0, spec.technique));
    }
    if !original.key_inputs().is_empty() {
        return Err(LockError::BadOption("circuit already has key inputs".into()));
    }
    let mut ctx = Ctx {
        c: original,
        spec,
        rng: ChaCha8Rng::seed_from_u64(spec.seed ^ 0x5eed_10c4),
    };
    let art = match spec.technique.family() {
        Family::HardCoded => hc::build(&mut ctx)?,
        Family::KeyGate => nhc::build(&mut ctx)?,
    };
    Ok(art)
}

fn outputs_of(c: &Circuit, words: &[u64]) -> Vec<u64> {
    let v = eval_words(c, words).expect("width checked");
    c.outputs().iter().map(|o| v[o.index()]).collect()
}

/// Every key that makes the locked circuit behave like the activated one.
/// Brute force; refuses key spaces above 16 bits.
pub fn correct_key_set(artifact: &LockArtifact, limit: usize) -> Result<Vec<Vec<bool>>, LockError> {
    let c = &artifact.locked;
    let nk = c.key_inputs().len();
    if nk > 16 {
        return Err(LockError::TooLarge(nk));
    }
    let golden = substitute_key(c, &TernaryPattern::from_bools(&artifact.secret_key))?;
    let ni = c.inputs().len();
    let mut rng = ChaCha8Rng::seed_from_u64(0xc0);
    let rounds: Vec<Vec<u64>> = (0..8).map(|_| (0..ni).map(|_| rng.gen()).collect()).collect();
    let want: Vec<Vec<u64>> = rounds
        .iter()
        .map(|w| {
            let mut full = w.clone();
            full.extend(artifact.secret_key.iter().map(|b| if *b { !0u64 } else { 0 }));
            outputs_of(c, &full)
        })
        .collect();
    let mut out = Vec::new();
    for m in 0..(1u32 << nk) {
        let key: Vec<bool> = (0..nk).map(|i| m >> i & 1 == 1).collect();
        let kw: Vec<u64> = key.iter().map(|b| if *b { !0u64 } else { 0 }).collect();
        let survives = rounds.iter().zip(&want).all(|(w, exp)| {
            let mut full = w.clone();
            full.extend_from_slice(&kw);
            outputs_of(c, &full) == *exp
        });
        if !survives {
            continue;
        }
        let cand = substitute_key(c, &TernaryPattern::from_bools(&key))?;
        if check_equivalence(&golden, &cand)?.is_equivalent() {
            out.push(key);
            if out.len() >= limit {
                break;
            }
        }
    }
    Ok(out)
}
