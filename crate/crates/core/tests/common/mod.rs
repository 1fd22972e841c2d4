// SPDX-License-Identifier: Apache-2.0

//! Seeded generator of small, well-formed mini-HDL designs with matching
//! stimuli, plus mutations that must be rejected.

#![allow(dead_code)]

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone)]
pub struct Generated {
    pub seed: u64,
    pub width: u32,
    pub text: String,
    pub stimulus_csv: String,
    pub inputs: Vec<String>,
    pub registers: Vec<String>,
    pub wires: Vec<String>,
    pub outputs: Vec<String>,
    pub observation_points: Vec<String>,
}

struct Gen {
    rng: ChaCha8Rng,
    width: u32,
    inputs: Vec<String>,
}

impl Gen {
    fn lit(&mut self) -> String {
        let v = self.rng.gen_range(0..(1u64 << self.width));
        format!("{}'d{}", self.width, v)
    }

    /// Inputs plus one or two signals of `pool` that are not inputs, so that
    /// combinational readers see only part of the state.
    fn narrow(&mut self, pool: &[String]) -> Vec<String> {
        let state: Vec<&String> = pool.iter().filter(|p| !self.inputs.contains(p)).collect();
        let mut out = self.inputs.clone();
        let n = self.rng.gen_range(1..=2).min(state.len());
        out.extend(
            state
                .choose_multiple(&mut self.rng, n)
                .map(|s| s.to_string()),
        );
        out
    }

    fn pick<'a>(&mut self, pool: &'a [String]) -> &'a str {
        pool.choose(&mut self.rng).expect("non-empty pool")
    }

    fn cond(&mut self, pool: &[String]) -> String {
        match self.rng.gen_range(0..3) {
            0 => format!("({} == {})", self.pick(pool), self.leaf(pool)),
            1 => format!("({} != {})", self.pick(pool), self.leaf(pool)),
            _ => {
                let k = self.rng.gen_range(0..self.width);
                format!("{}[{k}]", self.pick(pool))
            }
        }
    }

    fn leaf(&mut self, pool: &[String]) -> String {
        if self.rng.gen_bool(0.75) {
            self.pick(pool).to_string()
        } else {
            self.lit()
        }
    }

    fn expr(&mut self, pool: &[String], depth: u32) -> String {
        if depth == 0 {
            return self.leaf(pool);
        }
        let d = depth - 1;
        match self.rng.gen_range(0..8) {
            0 => format!("~{}", self.expr(pool, d)),
            1 => format!("({} & {})", self.expr(pool, d), self.expr(pool, d)),
            2 => format!("({} | {})", self.expr(pool, d), self.expr(pool, d)),
            3 => format!("({} ^ {})", self.expr(pool, d), self.expr(pool, d)),
            4 => format!(
                "({} ? {} : {})",
                self.cond(pool),
                self.expr(pool, d),
                self.expr(pool, d)
            ),
            5 if self.width > 1 => {
                let w = self.width;
                format!(
                    "{{{}[0], {}[{}:1]}}",
                    self.pick(pool),
                    self.pick(pool),
                    w - 1
                )
            }
            _ => self.leaf(pool),
        }
    }

    fn block(
        &mut self,
        regs: &[String],
        pool: &[String],
        depth: u32,
        indent: usize,
        out: &mut String,
    ) {
        let pad = " ".repeat(indent);
        for _ in 0..self.rng.gen_range(1..=3) {
            let roll = self.rng.gen_range(0..100);
            if depth >= 2 || roll < 55 {
                let r = self.pick(regs).to_string();
                let sub = self.narrow(pool);
                let e = self.expr(&sub, 2);
                let _ = writeln!(out, "{pad}{r} <= {e};");
            } else if roll < 85 {
                let c = self.cond(pool);
                let _ = writeln!(out, "{pad}if ({c}) {{");
                self.block(regs, pool, depth + 1, indent + 2, out);
                if self.rng.gen_bool(0.5) {
                    let _ = writeln!(out, "{pad}}} else {{");
                    self.block(regs, pool, depth + 1, indent + 2, out);
                }
                let _ = writeln!(out, "{pad}}}");
            } else {
                let subject = self.pick(pool).to_string();
                let mut labels: Vec<u64> = (0..(1u64 << self.width)).collect();
                labels.shuffle(&mut self.rng);
                let arms = self.rng.gen_range(1..=labels.len().min(3));
                let _ = writeln!(out, "{pad}case ({subject}) {{");
                for l in &labels[..arms] {
                    let _ = writeln!(out, "{pad}  {}'d{l}: {{", self.width);
                    self.block(regs, pool, depth + 1, indent + 4, out);
                    let _ = writeln!(out, "{pad}  }}");
                }
                if self.rng.gen_bool(0.5) {
                    let _ = writeln!(out, "{pad}  default: {{");
                    self.block(regs, pool, depth + 1, indent + 4, out);
                    let _ = writeln!(out, "{pad}  }}");
                }
                let _ = writeln!(out, "{pad}}}");
            }
        }
    }
}

fn names(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

pub fn generate(seed: u64) -> Generated {
    let mut g = Gen {
        rng: ChaCha8Rng::seed_from_u64(seed),
        width: 1,
        inputs: Vec::new(),
    };
    g.width = g.rng.gen_range(1..=3);
    let w = g.width;
    let inputs = names("i", g.rng.gen_range(1..=3));
    g.inputs = inputs.clone();
    let registers = names("r", g.rng.gen_range(1..=4));
    let wires = names("w", g.rng.gen_range(0..=2));
    let outputs = names("o", g.rng.gen_range(1..=2));

    let mut text = String::new();
    let _ = writeln!(text, "// generated from seed {seed}\ndesign g{seed};");
    for i in &inputs {
        let _ = writeln!(text, "  in {i} : {w};");
    }
    for r in &registers {
        let reset = g.lit();
        let _ = writeln!(text, "  reg {r} : {w} = {reset};");
    }
    let mut pool: Vec<String> = inputs.iter().chain(&registers).cloned().collect();
    for x in &wires {
        let sub = g.narrow(&pool);
        let e = g.expr(&sub, 2);
        let _ = writeln!(text, "  wire {x} : {w} = {e};");
        pool.push(x.clone());
    }
    for o in &outputs {
        let sub = g.narrow(&pool);
        let e = g.expr(&sub, 2);
        let _ = writeln!(text, "  out {o} : {w};\n  assign {o} = {e};");
    }

    // Split the registers over one or two clocked processes.
    let mut shuffled = registers.clone();
    shuffled.shuffle(&mut g.rng);
    let split = if shuffled.len() > 1 && g.rng.gen_bool(0.5) {
        g.rng.gen_range(1..shuffled.len())
    } else {
        shuffled.len()
    };
    for group in [&shuffled[..split], &shuffled[split..]] {
        if group.is_empty() {
            continue;
        }
        let mut body = String::new();
        g.block(group, &pool, 0, 4, &mut body);
        for r in group {
            if !body.contains(&format!("{r} <=")) {
                let e = g.expr(&pool, 1);
                if g.rng.gen_bool(0.5) {
                    let c = g.cond(&pool);
                    let _ = writeln!(body, "    if ({c}) {r} <= {e};");
                } else {
                    let _ = writeln!(body, "    {r} <= {e};");
                }
            }
        }
        let _ = writeln!(text, "  always {{\n{body}  }}");
    }
    text.push_str("end\n");

    let cycles = g.rng.gen_range(2..=10);
    let mut stimulus_csv = inputs.join(",");
    stimulus_csv.push('\n');
    for _ in 0..cycles {
        let row: Vec<String> = inputs
            .iter()
            .map(|_| format!("{:0w$b}", g.rng.gen_range(0..(1u64 << w)), w = w as usize))
            .collect();
        stimulus_csv.push_str(&row.join(","));
        stimulus_csv.push('\n');
    }

    let mut observation_points: Vec<String> = outputs
        .iter()
        .filter(|_| g.rng.gen_bool(0.7))
        .cloned()
        .collect();
    if g.rng.gen_bool(0.2) {
        observation_points.push(g.pick(&registers).to_string());
    }
    if observation_points.is_empty() {
        observation_points.push(outputs[0].clone());
    }

    Generated {
        seed,
        width: w,
        text,
        stimulus_csv,
        inputs,
        registers,
        wires,
        outputs,
        observation_points,
    }
}

/// Invalid variants of a generated design, each with the diagnostic kind
/// (by name) it must raise.
pub fn mutations(g: &Generated) -> Vec<(&'static str, String)> {
    let w = g.width;
    let insert = |line: String| g.text.replacen("end\n", &format!("  {line}\nend\n"), 1);
    vec![
        (
            "duplicate declaration",
            insert(format!("in {} : {w};", g.inputs[0])),
        ),
        (
            "undeclared signal",
            insert(format!("out zz : {w} = nope_{};", g.seed)),
        ),
        (
            "width mismatch",
            insert(format!("out zz : {} = {};", w + 1, g.inputs[0])),
        ),
        (
            "multiple drivers",
            insert(format!("assign {} = {};", g.outputs[0], g.inputs[0])),
        ),
        ("undriven signal", insert(format!("wire zz : {w};"))),
        (
            "combinational cycle",
            insert(format!("wire za : {w} = zb;\n  wire zb : {w} = ~za;")),
        ),
        (
            "register assigned outside clocked process",
            insert(format!("assign {} = {};", g.registers[0], g.inputs[0])),
        ),
        (
            "invalid assignment target",
            insert(format!("always {{ {} <= {}; }}", g.inputs[0], g.inputs[0])),
        ),
        ("syntax error", g.text.replacen(';', "", 1)),
    ]
}
