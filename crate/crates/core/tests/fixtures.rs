// SPDX-License-Identifier: Apache-2.0

//! The fixture designs checked against hand-written reference models. Every
//! fault is brute-forced through the model, which gives the detected set and
//! the first divergence cycle independently of the library simulator.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use slicefi::fault::{run_campaign, CampaignMode, FaultDescriptor};
use slicefi::hdl::parse_str;
use slicefi::sim::Stimulus;

type State = BTreeMap<&'static str, u64>;
type Inputs = BTreeMap<String, u64>;

struct Model {
    /// Registers with width and reset value.
    regs: &'static [(&'static str, u32, u64)],
    outputs: fn(&State, &Inputs) -> BTreeMap<&'static str, u64>,
    next: fn(&State, &Inputs) -> State,
}

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

fn read_inputs(name: &str) -> Vec<Inputs> {
    let text = std::fs::read_to_string(fixtures().join(format!("{name}.csv"))).unwrap();
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header: Vec<String> = lines
        .next()
        .unwrap()
        .split(',')
        .map(|s| s.trim().to_string())
        .collect();
    lines
        .map(|l| {
            header
                .iter()
                .cloned()
                .zip(
                    l.split(',')
                        .map(|v| u64::from_str_radix(v.trim(), 2).unwrap()),
                )
                .collect()
        })
        .collect()
}

/// Observations per cycle, with an optional flip at the start of a cycle.
fn run(
    m: &Model,
    inputs: &[Inputs],
    obs: &[&str],
    flip: Option<(&str, u32, usize)>,
) -> Vec<Vec<u64>> {
    let mut s: State = m.regs.iter().map(|(n, _, r)| (*n, *r)).collect();
    let mut trace = Vec::new();
    for (t, i) in inputs.iter().enumerate() {
        if let Some((r, b, c)) = flip {
            if c == t {
                *s.get_mut(r).unwrap() ^= 1 << b;
            }
        }
        let out = (m.outputs)(&s, i);
        trace.push(
            obs.iter()
                .map(|p| out.get(p).copied().unwrap_or_else(|| s[p]))
                .collect(),
        );
        s = (m.next)(&s, i);
    }
    trace
}

struct Oracle {
    golden: Vec<Vec<u64>>,
    detected: BTreeMap<FaultDescriptor, u32>,
}

fn oracle(m: &Model, inputs: &[Inputs], obs: &[&str]) -> Oracle {
    let golden = run(m, inputs, obs, None);
    let mut detected = BTreeMap::new();
    for (r, w, _) in m.regs {
        for b in 0..*w {
            for t in 0..inputs.len() {
                let faulty = run(m, inputs, obs, Some((r, b, t)));
                if let Some(c) = (0..inputs.len()).find(|c| faulty[*c] != golden[*c]) {
                    assert!(c >= t, "{r}[{b}]@{t} diverges before injection");
                    detected.insert(FaultDescriptor::new(*r, b, t as u32), c as u32);
                }
            }
        }
    }
    Oracle { golden, detected }
}

fn check(design: &str, m: &Model, stimulus: &str, obs: &[&str]) {
    let text = std::fs::read_to_string(fixtures().join(format!("{design}.mhdl"))).unwrap();
    let d = parse_str(&text).unwrap();
    let s = Stimulus::from_csv_path(&fixtures().join(format!("{stimulus}.csv"))).unwrap();
    let inputs = read_inputs(stimulus);
    let o = oracle(m, &inputs, obs);
    let points: Vec<String> = obs.iter().map(|p| p.to_string()).collect();

    for mode in [
        CampaignMode::Exhaustive,
        CampaignMode::StaticSlice,
        CampaignMode::DynamicSlice,
    ] {
        let r = run_campaign(&d, &s, &points, &mode, None, 2).unwrap();
        let golden: Vec<Vec<u64>> = r
            .golden
            .per_cycle
            .iter()
            .map(|row| row.iter().map(|b| b.value()).collect())
            .collect();
        assert_eq!(golden, o.golden, "{design}/{stimulus} golden trace");
        let want: BTreeSet<_> = o.detected.keys().cloned().collect();
        assert_eq!(r.detected(), want, "{design}/{stimulus} {mode}");
        for v in &r.verdicts {
            if let Some(c) = v.first_divergence_cycle {
                assert_eq!(Some(&c), o.detected.get(&v.fault), "{}", v.fault);
            }
        }
    }
}

fn bit(x: u64) -> u64 {
    x & 1
}

const CHOP: Model = Model {
    regs: &[("FF", 1, 0), ("H0", 1, 0), ("FO", 1, 0)],
    outputs: |s, i| {
        BTreeMap::from([
            ("TAR_F", s["FO"]),
            ("TAR_H", s["H0"] & i["SOURCE"]),
            ("TAR_D", s["FF"] & s["H0"]),
            ("TAR_N", bit(!(s["H0"] | i["INV"]))),
        ])
    },
    next: |s, i| {
        let mut n = s.clone();
        if i["DUP"] == 1 {
            n.insert("FF", i["SOURCE"]);
        }
        n.insert("H0", i["SOURCE"] ^ i["INV"]);
        if i["DUP"] == 0 {
            n.insert(
                "FO",
                if i["INV"] == 1 {
                    bit(!s["FF"])
                } else {
                    s["FF"]
                },
            );
        }
        n
    },
};

const SHIFT4: Model = Model {
    regs: &[
        ("s0", 2, 0),
        ("s1", 2, 0),
        ("s2", 2, 0),
        ("s3", 2, 0),
        ("par", 1, 0),
    ],
    outputs: |s, _| BTreeMap::from([("Q", s["s3"]), ("P", s["par"])]),
    next: |s, i| {
        let mut n = s.clone();
        if i["EN"] == 1 {
            n.insert("s0", i["D"]);
            n.insert("s1", s["s0"]);
            n.insert("s2", s["s1"]);
            n.insert("s3", s["s2"]);
            n.insert("par", s["par"] ^ bit(i["D"]) ^ bit(i["D"] >> 1));
        }
        n
    },
};

const REGS: [&str; 8] = ["r0", "r1", "r2", "r3", "r4", "r5", "r6", "r7"];

const REGFILE8: Model = Model {
    regs: &[
        ("r0", 4, 0),
        ("r1", 4, 0),
        ("r2", 4, 0),
        ("r3", 4, 0),
        ("r4", 4, 0),
        ("r5", 4, 0),
        ("r6", 4, 0),
        ("r7", 4, 0),
        ("dest_bin", 3, 0),
        ("rv", 1, 0),
        ("rdata_q", 4, 0),
        ("wbusy", 1, 0),
    ],
    outputs: |s, _| BTreeMap::from([("RDATA", s["rdata_q"]), ("WBUSY", s["wbusy"])]),
    next: |s, i| {
        let mut n = s.clone();
        if i["WE"] == 1 {
            n.insert(REGS[i["WADDR"] as usize], i["WDATA"]);
        }
        if i["RE"] == 1 {
            n.insert("dest_bin", i["RADDR"]);
        }
        n.insert("rv", i["RE"]);
        if s["rv"] == 1 {
            n.insert("rdata_q", s[REGS[s["dest_bin"] as usize]]);
        }
        n.insert("wbusy", i["WE"]);
        n
    },
};

#[test]
fn chop_matches_reference_model() {
    check("chop", &CHOP, "chop_ref", &["TAR_F"]);
    check("chop", &CHOP, "chop_long", &["TAR_F"]);
    check(
        "chop",
        &CHOP,
        "chop_long",
        &["TAR_F", "TAR_H", "TAR_D", "TAR_N"],
    );
    check("chop", &CHOP, "chop_ref", &["FF"]);
}

#[test]
fn shift4_matches_reference_model() {
    check("shift4", &SHIFT4, "shift4_stream", &["Q"]);
    check("shift4", &SHIFT4, "shift4_burst", &["Q", "P"]);
    check("shift4", &SHIFT4, "shift4_burst", &["s1"]);
}

#[test]
fn regfile8_matches_reference_model() {
    check("regfile8", &REGFILE8, "regfile8_busy", &["RDATA"]);
    check(
        "regfile8",
        &REGFILE8,
        "regfile8_sparse",
        &["RDATA", "WBUSY"],
    );
}

/// The chop reference stimulus: FF is only read while DUP is low, so its
/// flips before cycle 2 are overwritten unread.
#[test]
fn chop_reference_counts() {
    let o = oracle(&CHOP, &read_inputs("chop_ref"), &["TAR_F"]);
    let ff: Vec<u32> = o
        .detected
        .keys()
        .filter(|f| f.register == "FF")
        .map(|f| f.cycle)
        .collect();
    assert_eq!(ff, [2, 3]);
    assert_eq!(o.detected.len(), 7);
    assert_eq!(o.detected[&FaultDescriptor::new("FF", 0, 2)], 3);
}
