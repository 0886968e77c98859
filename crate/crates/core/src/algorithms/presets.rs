//! Hand-tuned parameter sets for the reference experiments, addressable by name.

use crate::algorithms::schedule::{ManualParams, Sequence};
use crate::algorithms::AlgorithmSpec;
use crate::compressors::{CompressorKind, CompressorSpec, Randomness};

/// The problem a preset was tuned on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PresetProblem {
    Constructed,
    LeastSquares,
    A9a,
    W8a,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Preset {
    pub name: String,
    pub problem: PresetProblem,
    pub algorithm: AlgorithmSpec,
    pub compressor: CompressorSpec,
}

fn adiana(eta: Sequence, theta1: Sequence, theta2: f64, p: f64) -> AlgorithmSpec {
    AlgorithmSpec::Adiana {
        schedule: crate::algorithms::ScheduleSpec::Manual(ManualParams {
            eta,
            theta1,
            theta2,
            p,
            alpha: None,
            beta: None,
            gamma: None,
        }),
    }
}

fn c(v: f64) -> Sequence {
    Sequence::Const(v)
}

fn harmonic(num: f64, offset: f64) -> Sequence {
    Sequence::Harmonic { num, offset }
}

fn ramp(offset: f64, scale: f64, cap: f64) -> Sequence {
    Sequence::Ramp { offset, scale, cap }
}

fn rand_s(s: usize, randomness: Randomness) -> CompressorSpec {
    CompressorSpec::random_s(s, randomness)
}

fn variant(tag: &str, d: usize, unscaled: bool) -> CompressorSpec {
    let kind = match tag {
        "rs" if unscaled => CompressorKind::UnscaledRandomS { s: d / 20 },
        "rs" => CompressorKind::RandomS { s: d / 20 },
        "nc" => CompressorKind::Natural,
        "rq" => CompressorKind::Quantize { levels: None },
        _ => unreachable!("unknown compressor tag {tag}"),
    };
    CompressorSpec::new(kind, Randomness::Independent)
}

/// Every shipped preset.
pub fn all_presets() -> Vec<Preset> {
    use PresetProblem::*;
    use Randomness::{Independent as Id, Shared as Sd};
    let mut out = Vec::new();
    let mut push = |name: String, problem, algorithm, compressor| {
        out.push(Preset {
            name,
            problem,
            algorithm,
            compressor,
        })
    };

    let cq = [
        ("id-rand1", rand_s(1, Id), 1.5e-4, 1.8e-1, 1.3e-1, 1.5e-1),
        ("id-rand2", rand_s(2, Id), 1.5e-4, 1.5e-4, 5.0e-2, 1.9e-1),
        ("id-rand4", rand_s(4, Id), 1.3e-4, 9.2e-2, 5.0e-2, 2.3e-1),
        ("sd-rand1", rand_s(1, Sd), 1.4e-6, 2.0e-2, 1.6e-1, 2.7e-2),
        ("sd-rand2", rand_s(2, Sd), 9.6e-6, 7.0e-2, 4.3e-1, 1.8e-1),
        ("sd-rand4", rand_s(4, Sd), 1.6e-5, 6.0e-2, 2.1e-1, 1.6e-1),
    ];
    push(
        "cq-nesterov".into(),
        Constructed,
        AlgorithmSpec::Nesterov { eta: 1.4e-1, theta: 1.2e-4 },
        CompressorSpec::identity(),
    );
    for (tag, comp, eta, t1, t2, p) in cq {
        push(format!("cq-adiana-{tag}"), Constructed, adiana(c(eta), c(t1), t2, p), comp);
    }

    // Least squares, d = 20.
    push(
        "ls-nesterov".into(),
        LeastSquares,
        AlgorithmSpec::Nesterov { eta: 3.0e-2, theta: 1.4e-2 },
        CompressorSpec::identity(),
    );
    let ls = [
        ("rs", (4.8e-2, 2.2e-2, 7.6e-2, 4.1e-2), 7.9e-2, 6.2e-2),
        ("nc", (3.9e-2, 1.0e-2, 2.9e-1, 9.9e-1), 7.4e-2, 6.8e-2),
        ("rq", (6.5e-2, 1.4e-2, 2.7e-1, 5.5e-1), 7.6e-2, 7.4e-2),
    ];
    for (tag, (eta, t1, t2, p), diana, ef21) in ls {
        push(format!("ls-adiana-{tag}"), LeastSquares, adiana(c(eta), c(t1), t2, p), variant(tag, 20, false));
        push(
            format!("ls-diana-{tag}"),
            LeastSquares,
            AlgorithmSpec::Diana { gamma: diana, alpha: None },
            variant(tag, 20, false),
        );
        push(format!("ls-ef21-{tag}"), LeastSquares, AlgorithmSpec::Ef21 { gamma: ef21 }, variant(tag, 20, true));
    }

    // Logistic regression, a9a (d = 123).
    push(
        "a9a-nesterov".into(),
        A9a,
        AlgorithmSpec::Nesterov { eta: 9.4e-1, theta: 1.7e-1 },
        CompressorSpec::identity(),
    );
    let a9a = [
        ("rs", adiana(c(2.1), harmonic(1.3e1, 5.2e2), 2.1e-1, 7.7e-1), 9.4e-1, 1.3),
        ("nc", adiana(c(2.1), harmonic(1.0, 4.3), 8.0e-3, 8.0e-1), 2.6, 1.6),
        ("rq", adiana(c(2.2), harmonic(1.3, 1.3), 1.5e-1, 8.5e-1), 4.7e-1, 2.7),
    ];
    for (tag, alg, diana, ef21) in a9a {
        push(format!("a9a-adiana-{tag}"), A9a, alg, variant(tag, 123, false));
        push(
            format!("a9a-diana-{tag}"),
            A9a,
            AlgorithmSpec::Diana { gamma: diana, alpha: None },
            variant(tag, 123, false),
        );
        push(format!("a9a-ef21-{tag}"), A9a, AlgorithmSpec::Ef21 { gamma: ef21 }, variant(tag, 123, true));
    }

    // Logistic regression, w8a (d = 300).
    push(
        "w8a-nesterov".into(),
        W8a,
        AlgorithmSpec::Nesterov { eta: 1.5e1, theta: 9.4e-1 },
        CompressorSpec::identity(),
    );
    let w8a = [
        ("rs", adiana(ramp(4.1e2, 1.2e2, 15.0), harmonic(8.8, 4.8e2), 2.4e-2, 3.6e-1), 1.5e1, 2.0e1),
        ("nc", adiana(c(1.5e1), harmonic(2.5, 1.1e1), 6.7e-1, 8.3e-1), 1.6e1, 1.5e1),
        ("rq", adiana(c(1.5e1), harmonic(1.9, 7.4), 4.2e-1, 9.9e-1), 1.5e1, 1.5e1),
    ];
    for (tag, alg, diana, ef21) in w8a {
        push(format!("w8a-adiana-{tag}"), W8a, alg, variant(tag, 300, false));
        push(
            format!("w8a-diana-{tag}"),
            W8a,
            AlgorithmSpec::Diana { gamma: diana, alpha: None },
            variant(tag, 300, false),
        );
        push(format!("w8a-ef21-{tag}"), W8a, AlgorithmSpec::Ef21 { gamma: ef21 }, variant(tag, 300, true));
    }
    out
}

pub fn preset_names() -> Vec<String> {
    all_presets().into_iter().map(|p| p.name).collect()
}

pub fn preset(name: &str) -> Option<Preset> {
    all_presets().into_iter().find(|p| p.name == name)
}
