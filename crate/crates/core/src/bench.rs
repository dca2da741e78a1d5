//! Benchmark circuit generators and their folding configurations.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::fixed::FixedPointFormat;
use crate::graph::{DataflowGraph, GraphBuilder, OpKind};
use crate::pattern::{pattern_from, ConfigDoc, CorePattern};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Bench {
    Fir,
    Iir,
    Pct,
    Tpid,
    Pi,
}

impl Bench {
    pub const ALL: [Bench; 5] = [Bench::Fir, Bench::Iir, Bench::Pct, Bench::Tpid, Bench::Pi];

    pub fn name(self) -> &'static str {
        match self {
            Bench::Fir => "fir",
            Bench::Iir => "iir",
            Bench::Pct => "pct",
            Bench::Tpid => "tpid",
            Bench::Pi => "pi",
        }
    }

    /// The circuit with default parameters (16 FIR taps).
    pub fn generate(self, fmt: FixedPointFormat) -> DataflowGraph {
        match self {
            Bench::Fir => {
                gen_fir(16, &default_fir_coefficients(16, fmt)).expect("matching coefficient count")
            }
            Bench::Iir => gen_iir(fmt),
            Bench::Pct => gen_pct(fmt),
            Bench::Tpid => gen_tpid(fmt),
            Bench::Pi => gen_pi(fmt, 0.5, 0.25),
        }
    }

    /// Folding configurations for the default circuit.
    pub fn configs(self) -> Vec<(String, ConfigDoc)> {
        match self {
            Bench::Fir => fir_configs(),
            Bench::Iir => iir_configs(),
            Bench::Pct => pct_configs(),
            Bench::Tpid => tpid_configs(),
            Bench::Pi => pi_configs(),
        }
    }
}

impl fmt::Display for Bench {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Bench {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Bench::ALL
            .into_iter()
            .find(|b| b.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown benchmark `{s}`")))
    }
}

fn real(fmt: FixedPointFormat, x: f64) -> i32 {
    fmt.from_real(x).expect("coefficient in range")
}

/// Zero-padded index so ids sort in index order.
fn idx(i: usize, taps: usize) -> String {
    let digits = taps.saturating_sub(1).to_string().len().max(2);
    format!("{i:0digits$}")
}

/// Triangular low-pass taps normalized to unit DC gain.
pub fn default_fir_coefficients(taps: usize, fmt: FixedPointFormat) -> Vec<i32> {
    let shape: Vec<f64> = (0..taps).map(|k| (k + 1).min(taps - k) as f64).collect();
    let sum: f64 = shape.iter().sum();
    shape.iter().map(|h| real(fmt, h / sum)).collect()
}

/// Direct-form FIR: tap line `d01..`, products `mK = tapK * cK` and the
/// adder chain `a01 = m00 + m01`, `aK = a(K-1) + mK`.
pub fn gen_fir(taps: usize, coefficients: &[i32]) -> Result<DataflowGraph> {
    if taps == 0 {
        return Err(Error::InvalidConfig("an FIR needs at least one tap".into()));
    }
    if coefficients.len() != taps {
        return Err(Error::InvalidConfig(format!(
            "{taps} taps need {taps} coefficients, got {}",
            coefficients.len()
        )));
    }
    let mut b = GraphBuilder::new(format!("fir{taps}"));
    b.input("x");
    let id = |p: &str, i: usize| format!("{p}{}", idx(i, taps));
    for k in 0..taps {
        b.constant(&id("c", k), coefficients[k]);
    }
    let mut tap = "x".to_string();
    for k in 0..taps {
        if k > 0 {
            let d = id("d", k);
            b.unary(&d, OpKind::Delay, &tap);
            tap = d;
        }
        b.binary(&id("m", k), OpKind::Mult, &tap, &id("c", k));
    }
    let mut acc = id("m", 0);
    for k in 1..taps {
        let a = id("a", k);
        b.binary(&a, OpKind::Add, &acc, &id("m", k));
        acc = a;
    }
    b.output("y", &acc);
    b.build()
}

/// Second-order recursive section: `w = x + a*w[-1] + b*w[-2]`,
/// `y = w + c*w[-1] + d*w[-2]`.
pub const IIR_COEFFICIENTS: [f64; 4] = [0.5, -0.25, 0.25, 0.125];

pub fn gen_iir(fmt: FixedPointFormat) -> DataflowGraph {
    let [a, bb, c, d] = IIR_COEFFICIENTS;
    let mut b = GraphBuilder::new("iir");
    b.input("x")
        .constant("ca", real(fmt, a))
        .constant("cb", real(fmt, bb))
        .constant("cc", real(fmt, c))
        .constant("cd", real(fmt, d));
    b.unary("d1", OpKind::Delay, "aw")
        .unary("d2", OpKind::Delay, "d1")
        .binary("ma", OpKind::Mult, "d1", "ca")
        .binary("mb", OpKind::Mult, "d2", "cb")
        .binary("mc", OpKind::Mult, "d1", "cc")
        .binary("md", OpKind::Mult, "d2", "cd")
        .binary("af", OpKind::Add, "mb", "ma")
        .binary("aw", OpKind::Add, "x", "af")
        .binary("ay2", OpKind::Add, "md", "mc")
        .binary("ay", OpKind::Add, "aw", "ay2")
        .output("y", "ay");
    b.build().expect("static benchmark")
}

/// Phase offsets in turns: a branch computes `current * sin(theta - offset)`.
/// The d branches give `ia cos t`, `-ib cos(t - 1/3)`, `-ic cos(t + 1/3)`,
/// the q branches `-ia sin t`, `ib sin(t - 1/3)`, `ic sin(t + 1/3)`.
pub const PCT_OFFSETS: [(&str, f64); 6] = [
    ("da", -0.25),
    ("db", -5.0 / 12.0),
    ("dc", -1.0 / 12.0),
    ("qa", -0.5),
    ("qb", 1.0 / 3.0),
    ("qc", -1.0 / 3.0),
];

/// Park transform of three phase currents at angle `theta` (in turns):
/// six sine-table branches, two subtractions per axis and a 2/3 scaling.
pub fn gen_pct(fmt: FixedPointFormat) -> DataflowGraph {
    let mut b = GraphBuilder::new("pct");
    b.input("theta").input("ia").input("ib").input("ic");
    b.constant("k_d", real(fmt, 2.0 / 3.0))
        .constant("k_q", real(fmt, 2.0 / 3.0));
    for (name, off) in PCT_OFFSETS {
        let current = format!("i{}", &name[1..]);
        b.constant(&format!("o_{name}"), real(fmt, off))
            .binary(
                &format!("ph_{name}"),
                OpKind::Sub,
                "theta",
                &format!("o_{name}"),
            )
            .unary(
                &format!("sn_{name}"),
                OpKind::SineLut,
                &format!("ph_{name}"),
            )
            .binary(
                &format!("p_{name}"),
                OpKind::Mult,
                &current,
                &format!("sn_{name}"),
            );
    }
    for axis in ["d", "q"] {
        b.binary(
            &format!("x_{axis}1"),
            OpKind::Sub,
            &format!("p_{axis}a"),
            &format!("p_{axis}b"),
        )
        .binary(
            &format!("x_{axis}2"),
            OpKind::Sub,
            &format!("x_{axis}1"),
            &format!("p_{axis}c"),
        )
        .binary(
            &format!("s_{axis}"),
            OpKind::Mult,
            &format!("x_{axis}2"),
            &format!("k_{axis}"),
        )
        .output(axis, &format!("s_{axis}"));
    }
    b.build().expect("static benchmark")
}

pub const TPID_GAINS: [(f64, f64, f64); 3] =
    [(0.5, 0.125, 0.25), (0.75, 0.0625, 0.125), (0.25, 0.25, 0.5)];

/// Three rectangular-rule PID controllers: `e = r - y`,
/// `u = kp*e + I + kd*(e - e[-1])` with `I = I[-1] + ki*e`.
pub fn gen_tpid(fmt: FixedPointFormat) -> DataflowGraph {
    gen_tpid_with(fmt, TPID_GAINS)
}

pub fn gen_tpid_with(fmt: FixedPointFormat, gains: [(f64, f64, f64); 3]) -> DataflowGraph {
    let mut b = GraphBuilder::new("tpid");
    for (k, (kp, ki, kd)) in gains.iter().enumerate() {
        let n = |s: &str| format!("{s}{}", k + 1);
        b.input(&n("r")).input(&n("y"));
        b.constant(&n("kp"), real(fmt, *kp))
            .constant(&n("ki"), real(fmt, *ki))
            .constant(&n("kd"), real(fmt, *kd));
        b.binary(&n("e"), OpKind::Sub, &n("r"), &n("y"))
            .binary(&n("mp"), OpKind::Mult, &n("e"), &n("kp"))
            .binary(&n("mi"), OpKind::Mult, &n("e"), &n("ki"))
            .binary(&n("ai"), OpKind::Add, &n("mi"), &n("zi"))
            .unary(&n("zi"), OpKind::Delay, &n("ai"))
            .unary(&n("zd"), OpKind::Delay, &n("e"))
            .binary(&n("sd"), OpKind::Sub, &n("e"), &n("zd"))
            .binary(&n("md"), OpKind::Mult, &n("sd"), &n("kd"))
            .binary(&n("as"), OpKind::Add, &n("mp"), &n("ai"))
            .binary(&n("ao"), OpKind::Add, &n("as"), &n("md"))
            .output(&n("u"), &n("ao"));
    }
    b.build().expect("static benchmark")
}

/// Transposed-form discrete PI controller:
/// `y = b0*e + s`, `s' = b1*e + y` with `b0 = kp + ki`, `b1 = -kp`.
pub fn gen_pi(fmt: FixedPointFormat, kp: f64, ki: f64) -> DataflowGraph {
    let mut b = GraphBuilder::new("pi");
    b.input("e")
        .constant("b0", real(fmt, kp + ki))
        .constant("b1", real(fmt, -kp));
    b.binary("prod2", OpKind::Mult, "e", "b0")
        .binary("prod1", OpKind::Mult, "e", "b1")
        .binary("add1", OpKind::Add, "prod2", "z")
        .unary("z", OpKind::Delay, "add2")
        .binary("add2", OpKind::Add, "prod1", "add1")
        .output("y", "add1");
    b.build().expect("static benchmark")
}

pub mod patterns {
    //! Folding-core patterns used by the benchmark configurations.

    use super::*;

    pub fn single(kind: OpKind) -> CorePattern {
        CorePattern::single(kind).expect("foldable kind")
    }

    /// `k` consecutive FIR taps, each {delay, mult, add}.
    pub fn fir_taps(k: usize) -> CorePattern {
        let ids: Vec<[String; 3]> = (1..=k)
            .map(|i| [format!("d{i}"), format!("m{i}"), format!("a{i}")])
            .collect();
        let mut nodes = Vec::new();
        let mut edges = Vec::new();
        for (i, [d, m, a]) in ids.iter().enumerate() {
            nodes.push((d.as_str(), OpKind::Delay));
            nodes.push((m.as_str(), OpKind::Mult));
            nodes.push((a.as_str(), OpKind::Add));
            edges.push((d.as_str(), m.as_str(), 0, 0));
            edges.push((m.as_str(), a.as_str(), 1, 0));
            if i > 0 {
                let [pd, _, pa] = &ids[i - 1];
                edges.push((pd.as_str(), d.as_str(), 0, 0));
                edges.push((pa.as_str(), a.as_str(), 0, 0));
            }
        }
        pattern_from(&format!("fir-taps-{k}"), &nodes, &edges)
    }

    pub fn delay_mult() -> CorePattern {
        pattern_from(
            "delay-mult",
            &[("d", OpKind::Delay), ("m", OpKind::Mult)],
            &[("d", "m", 0, 0)],
        )
    }

    /// Product into an adder.
    pub fn mult_add() -> CorePattern {
        pattern_from(
            "mult-add",
            &[("m", OpKind::Mult), ("a", OpKind::Add)],
            &[("m", "a", 1, 0)],
        )
    }

    pub fn mult_add_add() -> CorePattern {
        pattern_from(
            "mult-add-add",
            &[
                ("m", OpKind::Mult),
                ("a1", OpKind::Add),
                ("a2", OpKind::Add),
            ],
            &[("m", "a1", 1, 0), ("a1", "a2", 1, 0)],
        )
    }

    pub fn two_mult_two_add() -> CorePattern {
        pattern_from(
            "mult2-add2",
            &[
                ("m1", OpKind::Mult),
                ("m2", OpKind::Mult),
                ("a1", OpKind::Add),
                ("a2", OpKind::Add),
            ],
            &[("m1", "a1", 0, 0), ("m2", "a1", 1, 0), ("a1", "a2", 1, 0)],
        )
    }

    /// Phase subtraction, sine table and product of one transform branch.
    pub fn sub_sin_mult() -> CorePattern {
        pattern_from(
            "sub-sin-mult",
            &[
                ("s", OpKind::Sub),
                ("l", OpKind::SineLut),
                ("p", OpKind::Mult),
            ],
            &[("s", "l", 0, 0), ("l", "p", 1, 0)],
        )
    }

    pub fn sin_mult() -> CorePattern {
        pattern_from(
            "sin-mult",
            &[("l", OpKind::SineLut), ("p", OpKind::Mult)],
            &[("l", "p", 1, 0)],
        )
    }

    /// One transform axis: three branches combined by two subtractions.
    pub fn pct_axis() -> CorePattern {
        let mut nodes = Vec::new();
        let mut edges = Vec::new();
        let names = [("s1", "l1", "p1"), ("s2", "l2", "p2"), ("s3", "l3", "p3")];
        for (s, l, p) in names {
            nodes.push((s, OpKind::Sub));
            nodes.push((l, OpKind::SineLut));
            nodes.push((p, OpKind::Mult));
            edges.push((s, l, 0, 0));
            edges.push((l, p, 1, 0));
        }
        nodes.push(("x1", OpKind::Sub));
        nodes.push(("x2", OpKind::Sub));
        edges.extend([
            ("p1", "x1", 0, 0),
            ("p2", "x1", 1, 0),
            ("x1", "x2", 0, 0),
            ("p3", "x2", 1, 0),
        ]);
        pattern_from("pct-axis", &nodes, &edges)
    }

    pub fn sub_mult_add() -> CorePattern {
        pattern_from(
            "sub-mult-add",
            &[("s", OpKind::Sub), ("m", OpKind::Mult), ("a", OpKind::Add)],
            &[("s", "m", 0, 0), ("m", "a", 0, 0)],
        )
    }

    pub fn sub_mult() -> CorePattern {
        pattern_from(
            "sub-mult",
            &[("s", OpKind::Sub), ("m", OpKind::Mult)],
            &[("s", "m", 0, 0)],
        )
    }

    /// Proportional branch: gain product into the first sum.
    pub fn pid_p() -> CorePattern {
        pattern_from(
            "pid-p",
            &[("m", OpKind::Mult), ("a", OpKind::Add)],
            &[("m", "a", 0, 0)],
        )
    }

    /// Integrator: gain product accumulated through a register.
    pub fn pid_i() -> CorePattern {
        pattern_from(
            "pid-i",
            &[
                ("m", OpKind::Mult),
                ("a", OpKind::Add),
                ("z", OpKind::Delay),
            ],
            &[("m", "a", 0, 0), ("z", "a", 1, 0), ("a", "z", 0, 0)],
        )
    }

    /// Differentiator: backward difference times gain.
    pub fn pid_d() -> CorePattern {
        pattern_from(
            "pid-d",
            &[
                ("z", OpKind::Delay),
                ("s", OpKind::Sub),
                ("m", OpKind::Mult),
            ],
            &[("z", "s", 1, 0), ("s", "m", 0, 0)],
        )
    }

    /// A complete PID controller without its ports.
    pub fn pid() -> CorePattern {
        pattern_from(
            "pid",
            &[
                ("e", OpKind::Sub),
                ("mp", OpKind::Mult),
                ("mi", OpKind::Mult),
                ("ai", OpKind::Add),
                ("zi", OpKind::Delay),
                ("zd", OpKind::Delay),
                ("sd", OpKind::Sub),
                ("md", OpKind::Mult),
                ("as", OpKind::Add),
                ("ao", OpKind::Add),
            ],
            &[
                ("e", "mp", 0, 0),
                ("e", "mi", 0, 0),
                ("mi", "ai", 0, 0),
                ("zi", "ai", 1, 0),
                ("ai", "zi", 0, 0),
                ("e", "zd", 0, 0),
                ("e", "sd", 0, 0),
                ("zd", "sd", 1, 0),
                ("sd", "md", 0, 0),
                ("mp", "as", 0, 0),
                ("ai", "as", 1, 0),
                ("as", "ao", 0, 0),
                ("md", "ao", 1, 0),
            ],
        )
    }
}

fn cfg(name: &str, classes: &[(CorePattern, usize)]) -> (String, ConfigDoc) {
    let refs: Vec<(&CorePattern, usize)> = classes.iter().map(|(p, c)| (p, *c)).collect();
    (name.to_string(), ConfigDoc::from_patterns(name, &refs))
}

/// Embedding of [`patterns::fir_taps`]`(k)` on taps `first..first+k` of
/// the 16-tap filter.
fn fir_tap_map(first: usize, k: usize) -> BTreeMap<String, String> {
    (0..k)
        .flat_map(|i| {
            let g = idx(first + i, 16);
            [
                (format!("d{}", i + 1), format!("d{g}")),
                (format!("m{}", i + 1), format!("m{g}")),
                (format!("a{}", i + 1), format!("a{g}")),
            ]
        })
        .collect()
}

fn fir_mult_add_map(tap: usize) -> BTreeMap<String, String> {
    let g = idx(tap, 16);
    [
        ("m".to_string(), format!("m{g}")),
        ("a".to_string(), format!("a{g}")),
    ]
    .into()
}

/// Pins the instances of each class, in class order.
fn pinned(
    mut doc: (String, ConfigDoc),
    maps: Vec<Vec<BTreeMap<String, String>>>,
) -> (String, ConfigDoc) {
    for (class, m) in doc.1.classes.iter_mut().zip(maps) {
        class.instances = Some(m);
    }
    doc
}

pub fn fir_configs() -> Vec<(String, ConfigDoc)> {
    use patterns::*;
    let mult = || single(OpKind::Mult);
    // Along the adder chain each class needs rising slots, so the mixed
    // covers interleave their classes rather than taking the greedy cover.
    let n3 = pinned(
        cfg("fir_n3_taps4_taps1", &[(fir_taps(4), 3), (fir_taps(1), 2)]),
        vec![
            vec![fir_tap_map(1, 4), fir_tap_map(6, 4), fir_tap_map(10, 4)],
            vec![fir_tap_map(5, 1), fir_tap_map(14, 1)],
        ],
    );
    let n4 = pinned(
        cfg(
            "fir_n4_taps3_mult_add",
            &[(fir_taps(3), 4), (mult_add(), 3)],
        ),
        vec![
            [1, 5, 9, 13]
                .into_iter()
                .map(|t| fir_tap_map(t, 3))
                .collect(),
            [4, 8, 12].into_iter().map(fir_mult_add_map).collect(),
        ],
    );
    let n5 = pinned(
        cfg("fir_n5_taps2_taps1", &[(fir_taps(2), 5), (fir_taps(1), 2)]),
        vec![
            [1, 4, 6, 8, 10]
                .into_iter()
                .map(|t| fir_tap_map(t, 2))
                .collect(),
            vec![fir_tap_map(3, 1), fir_tap_map(12, 1)],
        ],
    );
    // The leftover product is the one feeding the first adder, so the adder
    // chain can follow the shared multiplier slot by slot.
    let split = pinned(
        cfg(
            "fir_n15_add_mult",
            &[(single(OpKind::Add), 15), (mult(), 15)],
        ),
        vec![
            (1..16)
                .map(|k| [("add".to_string(), format!("a{}", idx(k, 16)))].into())
                .collect(),
            (1..16)
                .map(|k| [("mult".to_string(), format!("m{}", idx(k, 16)))].into())
                .collect(),
        ],
    );
    vec![
        cfg("fir_n2_taps7", &[(fir_taps(7), 2)]),
        cfg("fir_n2_delay_mult", &[(delay_mult(), 2)]),
        n3,
        n4,
        n5,
        cfg("fir_n7_taps2", &[(fir_taps(2), 7)]),
        cfg("fir_n14_taps1", &[(fir_taps(1), 14)]),
        cfg("fir_n14_delay_mult", &[(delay_mult(), 14)]),
        cfg("fir_n15_mult", &[(mult(), 15)]),
        cfg("fir_n15_mult_add", &[(mult_add(), 15)]),
        split,
        cfg("fir_n16_mult", &[(mult(), 16)]),
    ]
}

pub fn iir_configs() -> Vec<(String, ConfigDoc)> {
    use patterns::*;
    vec![
        cfg("iir_n2_mult_add_add", &[(mult_add_add(), 2)]),
        cfg("iir_n2_mult2_add2", &[(two_mult_two_add(), 2)]),
        cfg("iir_n2_mult_add", &[(mult_add(), 2)]),
        cfg(
            "iir_n4_add_mult",
            &[(single(OpKind::Add), 4), (single(OpKind::Mult), 4)],
        ),
        cfg("iir_n4_mult", &[(single(OpKind::Mult), 4)]),
    ]
}

pub fn pct_configs() -> Vec<(String, ConfigDoc)> {
    use patterns::*;
    let sin = || single(OpKind::SineLut);
    let mult = || single(OpKind::Mult);
    let sub = || single(OpKind::Sub);
    vec![
        cfg("pct_n2_axis", &[(pct_axis(), 2)]),
        cfg(
            "pct_n2_branches",
            &[
                (sub_sin_mult(), 2),
                (sub_sin_mult(), 2),
                (sub_sin_mult(), 2),
            ],
        ),
        cfg(
            "pct_n3_branches",
            &[(sub_sin_mult(), 3), (sub_sin_mult(), 3)],
        ),
        cfg("pct_n6_sin_mult", &[(sin_mult(), 6)]),
        cfg("pct_n6_ops", &[(sin(), 6), (mult(), 6), (mult(), 2)]),
        cfg(
            "pct_n6_ops_sub",
            &[(sin(), 6), (mult(), 6), (mult(), 2), (sub(), 6), (sub(), 4)],
        ),
        cfg(
            "pct_n6_ops_sub_split",
            &[
                (sin(), 6),
                (mult(), 6),
                (mult(), 2),
                (sub(), 3),
                (sub(), 3),
                (sub(), 2),
                (sub(), 2),
            ],
        ),
        cfg(
            "pct_n6_branches_rest",
            &[(sub_sin_mult(), 6), (mult(), 2), (sub(), 4)],
        ),
        cfg("pct_n6_sin", &[(sin(), 6)]),
        cfg("pct_n6_branches", &[(sub_sin_mult(), 6)]),
    ]
}

pub fn tpid_configs() -> Vec<(String, ConfigDoc)> {
    use patterns::*;
    vec![
        cfg("tpid_n3_sub_mult_add", &[(sub_mult_add(), 3)]),
        cfg("tpid_n3_pid", &[(pid(), 3)]),
        cfg("tpid_n3_p_i_d", &[(pid_p(), 3), (pid_i(), 3), (pid_d(), 3)]),
        cfg("tpid_n6_sub_mult", &[(sub_mult(), 6)]),
        cfg("tpid_n9_mult", &[(single(OpKind::Mult), 9)]),
        cfg(
            "tpid_n9_ops",
            &[
                (single(OpKind::Mult), 9),
                (single(OpKind::Add), 9),
                (single(OpKind::Sub), 6),
            ],
        ),
        cfg("tpid_n9_mult_add", &[(pid_p(), 9)]),
    ]
}

pub fn pi_configs() -> Vec<(String, ConfigDoc)> {
    use patterns::*;
    vec![
        cfg("pi_n2_mult_add", &[(mult_add(), 2)]),
        cfg("pi_n2_mult", &[(single(OpKind::Mult), 2)]),
        cfg("pi_n2_add", &[(single(OpKind::Add), 2)]),
    ]
}
