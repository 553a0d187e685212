//! Small named instances used throughout the tests and the CLI examples.

use crate::instance::Instance;

/// Three agents in a cycle. Each owns an autarkic contract `a_i` and ranks
/// `a_i < c_{(i-1)i} < c_{i(i+1)}` (indices mod 3). Has no stable system.
pub const CYC3_JSON: &str = r#"{
  "agents": ["1", "2", "3"],
  "contracts": [
    {"id": "a1", "participants": ["1"]},
    {"id": "a2", "participants": ["2"]},
    {"id": "a3", "participants": ["3"]},
    {"id": "c12", "participants": ["1", "2"]},
    {"id": "c23", "participants": ["2", "3"]},
    {"id": "c31", "participants": ["3", "1"]}
  ],
  "preferences": {
    "1": {"type": "linear", "ranking": ["c12", "c31", "a1"]},
    "2": {"type": "linear", "ranking": ["c23", "c12", "a2"]},
    "3": {"type": "linear", "ranking": ["c31", "c23", "a3"]}
  }
}"#;

/// 2×2 marriage market; everyone ranks the index-matching partner first.
pub const MARR_JSON: &str = r#"{
  "agents": ["m1", "m2", "w1", "w2"],
  "contracts": [
    {"id": "m1w1", "participants": ["m1", "w1"]},
    {"id": "m1w2", "participants": ["m1", "w2"]},
    {"id": "m2w1", "participants": ["m2", "w1"]},
    {"id": "m2w2", "participants": ["m2", "w2"]}
  ],
  "preferences": {
    "m1": {"type": "linear", "ranking": ["m1w1", "m1w2"]},
    "m2": {"type": "linear", "ranking": ["m2w2", "m2w1"]},
    "w1": {"type": "linear", "ranking": ["m1w1", "m2w1"]},
    "w2": {"type": "linear", "ranking": ["m2w2", "m1w2"]}
  }
}"#;

/// Agent `0` picks with the union of `c > d` and `d > c`; agent `j` ranks `c > d`.
pub const SPLIT2_JSON: &str = r#"{
  "agents": ["0", "j"],
  "contracts": [
    {"id": "c", "participants": ["0", "j"]},
    {"id": "d", "participants": ["0", "j"]}
  ],
  "preferences": {
    "0": {"type": "union", "parts": [["c", "d"], ["d", "c"]]},
    "j": {"type": "linear", "ranking": ["c", "d"]}
  }
}"#;

/// Two agents sharing one contract and nothing else.
pub const PAIR_JSON: &str = r#"{
  "agents": ["1", "2"],
  "contracts": [{"id": "c12", "participants": ["1", "2"]}],
  "preferences": {
    "1": {"type": "linear", "ranking": ["c12"]},
    "2": {"type": "linear", "ranking": ["c12"]}
  }
}"#;

/// One agent with one autarkic contract.
pub const SOLO_JSON: &str = r#"{
  "agents": ["1"],
  "contracts": [{"id": "a", "participants": ["1"]}],
  "preferences": {"1": {"type": "linear", "ranking": ["a"]}}
}"#;

pub fn cyc3() -> Instance {
    Instance::from_json(CYC3_JSON).expect("fixture")
}

pub fn marr() -> Instance {
    Instance::from_json(MARR_JSON).expect("fixture")
}

pub fn split2() -> Instance {
    Instance::from_json(SPLIT2_JSON).expect("fixture")
}

pub fn pair_only() -> Instance {
    Instance::from_json(PAIR_JSON).expect("fixture")
}

pub fn solo() -> Instance {
    Instance::from_json(SOLO_JSON).expect("fixture")
}
