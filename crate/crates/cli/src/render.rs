//! Human-readable text output.

use std::fmt::Write;

use nimrep_core::bcft::{
    AnnulusSpectrum, ChannelSummary, FullReport, HeatKernelSummary, IndexSummary, ModelSummary, PairCheck, PsiSummary,
    Quantity,
};
use nimrep_core::characters::ChannelResidual;
use nimrep_core::fusion::{AxiomReport, FusionRing};
use nimrep_core::graphs::graph_name;
use nimrep_core::nimreps::{spectrum_match, NimrepReport};
use nimrep_core::numeric::format_rational;
use nimrep_core::{IntMatrix, ModularData, ModularInvariant, Nimrep, QSeries};

/// Coefficients shown per series in text mode.
const SHOWN: usize = 16;

fn q(x: &Quantity) -> String {
    match x {
        Quantity::ExactInteger { value } | Quantity::ExactRational { value } | Quantity::Float { value, .. } => value.clone(),
        Quantity::ExactIntegerList { values } => format!("[{}]", values.join(", ")),
        Quantity::ExactIntegerMatrix { rows } => format!("{rows:?}"),
    }
}

fn matrix(out: &mut String, m: &IntMatrix, indent: &str) {
    for row in m.rows() {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:>2}")).collect();
        let _ = writeln!(out, "{indent}[{}]", cells.join(" "));
    }
}

fn series_head(s: &QSeries) -> String {
    let shown: Vec<String> = s.coeffs().iter().take(SHOWN).map(ToString::to_string).collect();
    let more = if s.coeffs().len() > SHOWN { ", ..." } else { "" };
    let step = if s.grid() == 1 { String::new() } else { format!(" (step 1/{})", s.grid()) };
    format!("q^({}) [{}{more}]{step}", format_rational(s.offset()), shown.join(", "))
}

fn mark(passed: bool) -> &'static str {
    if passed {
        "PASS"
    } else {
        "FAIL"
    }
}

pub fn families() -> String {
    "built-in families:\n  su2      --model su2 --level K          (K >= 1, sectors 0..=K)\n  minimal  --model minimal --p P --pp P'  (coprime, P > P' >= 2; Ising is 4,3, Lee-Yang 5,2)\n  file     --model-file PATH              (JSON model document with an explicit S matrix)\n".into()
}

pub fn model(m: &ModelSummary) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "model {} ({})", m.name, m.family);
    let _ = writeln!(out, "c = {}", q(&m.central_charge));
    let _ = writeln!(out, "global index mu = {}", q(&m.global_index));
    let _ = writeln!(out, "{:>4}  {:<10} {:<10} d", "#", "sector", "h");
    for (i, s) in m.sectors.iter().enumerate() {
        let _ = writeln!(out, "{i:>4}  {:<10} {:<10} {}", s.name, q(&s.h), q(&s.quantum_dimension));
    }
    out
}

pub fn fusion(md: &ModularData, fr: &FusionRing, axioms: &AxiomReport) -> String {
    let names: Vec<&str> = md.sectors().iter().map(|s| s.name.as_str()).collect();
    let mut out = String::new();
    let _ = writeln!(out, "fusion rules of {} ({} sectors)", md.name(), fr.len());
    for s in 0..fr.len() {
        for r in s..fr.len() {
            let terms: Vec<String> = fr
                .product(s, r)
                .into_iter()
                .map(|(t, c)| if c == 1 { names[t].to_string() } else { format!("{c}*{}", names[t]) })
                .collect();
            let _ = writeln!(out, "  {} x {} = {}", names[s], names[r], terms.join(" + "));
        }
    }
    let _ = writeln!(out, "axioms: {}", mark(axioms.passed()));
    for (v, c) in axioms.violations.iter().zip(&axioms.counts) {
        let _ = writeln!(out, "  {v:?} ({c} failing)");
    }
    out
}

pub fn invariants(md: &ModularData, zs: &[ModularInvariant]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{} physical invariant(s) for {}", zs.len(), md.name());
    for (i, z) in zs.iter().enumerate() {
        let (sector, mult) = z.max_multiplicity();
        let _ = writeln!(
            out,
            "[{i}] {}  exponents {:?}  tr Z = {}  max Z_ll = {mult} at {sector}",
            z.tag(),
            z.exponents(),
            z.trace()
        );
        matrix(&mut out, z.z(), "    ");
    }
    out
}

pub fn characters(md: &ModularData, chars: &[QSeries]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "characters of {}: chi = q^(h - c/24) * sum_j a_j q^j", md.name());
    for (s, chi) in md.sectors().iter().zip(chars) {
        let _ = writeln!(out, "  {:<8} {}", s.name, series_head(chi));
    }
    out
}

pub fn annulus(md: &ModularData, nr: &Nimrep, sp: &AnnulusSpectrum) -> String {
    let labels = nr.labels();
    let terms: Vec<String> = sp
        .multiplicities
        .iter()
        .enumerate()
        .filter(|(_, m)| **m != 0)
        .map(|(rho, m)| {
            let chi = format!("chi[{}]", md.sectors()[rho].name);
            if *m == 1 {
                chi
            } else {
                format!("{m}*{chi}")
            }
        })
        .collect();
    let mut out = String::new();
    let _ = writeln!(out, "annulus ({}, {}) with nimrep {}", labels[sp.a], labels[sp.b], nr.name().unwrap_or("-"));
    let _ = writeln!(out, "multiplicities n^rho_ab = {:?}", sp.multiplicities);
    let _ = writeln!(out, "Z_ab = {}", if terms.is_empty() { "0".into() } else { terms.join(" + ") });
    let _ = writeln!(out, "vacuum present: {}", sp.vacuum_present);
    let _ = writeln!(out, "series: {}", series_head(&sp.z_ab));
    out
}

pub fn indices(md: &ModularData, s: &IndexSummary) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "chiral extension theta = {} in {}", s.boundary, md.name());
    let _ = writeln!(out, "  multiplicities      {}", q(&s.theta));
    let _ = writeln!(out, "  d(pi)               {}", q(&s.d_pi));
    let _ = writeln!(out, "  mu                  {}", q(&s.mu));
    let _ = writeln!(out, "  two-interval index  {}", q(&s.two_interval));
    let _ = writeln!(out, "  C8 index            {}", q(&s.c8_index));
    out
}

pub fn nimrep(nr: &Nimrep) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "nimrep {} on {} labels {:?}", nr.name().unwrap_or("-"), nr.size(), nr.labels());
    for (rho, m) in nr.mats().iter().enumerate() {
        let _ = writeln!(out, "  n^{rho}:");
        matrix(&mut out, m, "    ");
    }
    out
}

pub fn nimrep_list(md: &ModularData, nrs: &[Nimrep], zs: &[ModularInvariant]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{} nimrep(s) for {}", nrs.len(), md.name());
    for nr in nrs {
        let matched: Vec<&str> = zs
            .iter()
            .filter(|z| matches!(spectrum_match(nr, z, md), Ok(r) if r.passed()))
            .map(ModularInvariant::tag)
            .collect();
        let generator = nr.mats().get(1).and_then(graph_name).unwrap_or_else(|| "?".into());
        let _ = writeln!(out, "  {generator:<4} size {:<3} matches {matched:?}", nr.size());
        if let Some(g) = nr.mats().get(1) {
            matrix(&mut out, g, "    ");
        }
    }
    out
}

pub fn verification(nr: &Nimrep, r: &NimrepReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "nimrep {} on {} labels: {}", nr.name().unwrap_or("-"), nr.size(), mark(r.passed()));
    for (v, c) in r.violations.iter().zip(&r.counts) {
        let _ = writeln!(out, "  {v:?} ({c} failing)");
    }
    let _ = writeln!(out, "realizability: {}", r.realizability());
    out
}

pub fn channel(name: &str, r: &ChannelResidual) -> String {
    format!(
        "{name}: {}  residual {:.3e} (numeric {:.3e} + tail {:.3e})  tolerance {:.1e}\n",
        mark(r.passed()),
        r.residual(),
        r.numeric,
        r.tail_bound,
        r.tolerance
    )
}

pub fn heat_kernel(z: &ModularInvariant, pairs: &[PairCheck]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "heat-kernel check against invariant {}", z.tag());
    for p in pairs {
        let _ = writeln!(
            out,
            "  ({}, {})  {}  residual {}  tail {}",
            p.a,
            p.b,
            mark(p.check.passed),
            q(&p.check.residual),
            q(&p.tail_bound)
        );
    }
    let failed = pairs.iter().filter(|p| !p.check.passed).count();
    let _ = writeln!(out, "{} of {} pairs pass", pairs.len() - failed, pairs.len());
    out
}

pub fn report(r: &FullReport) -> String {
    let mut out = model(&r.model);
    let _ = writeln!(
        out,
        "settings: precision {}  order {}  beta {}",
        r.settings.precision,
        r.settings.order,
        q(&r.settings.beta)
    );
    let _ = writeln!(out, "invariant {}  exponents {}", r.invariant.tag, q(&r.invariant.exponents));
    let _ = writeln!(
        out,
        "nimrep {} labels {:?}: verify {}  realizability {}",
        r.nimrep.name.as_deref().unwrap_or("-"),
        r.nimrep.labels,
        mark(r.nimrep.verified),
        r.nimrep.realizability
    );
    for v in &r.nimrep.violations {
        let _ = writeln!(out, "  {v}");
    }
    let _ = writeln!(out, "spectrum match: {}  residual {}", mark(r.spectrum_match.passed), q(&r.spectrum_match.residual));
    match &r.psi {
        PsiSummary::Computed { unitarity, cardy_verlinde, .. } => {
            let _ = writeln!(
                out,
                "psi: unitarity {} ({})  Cardy-Verlinde {} ({})",
                mark(unitarity.passed),
                q(&unitarity.residual),
                mark(cardy_verlinde.passed),
                q(&cardy_verlinde.residual)
            );
        }
        PsiSummary::Skipped { reason } => {
            let _ = writeln!(out, "psi: skipped ({reason})");
        }
    }
    let _ = writeln!(out, "annulus spectra ({}):", r.annulus.len());
    for a in &r.annulus {
        let _ = writeln!(out, "  ({}, {})  n = {}  vacuum {}", a.a, a.b, q(&a.multiplicities), a.vacuum_present);
    }
    match &r.heat_kernel {
        HeatKernelSummary::Computed { pairs } => {
            let worst = pairs.iter().filter(|p| !p.check.passed).count();
            let _ = writeln!(out, "heat kernel: {} of {} pairs pass", pairs.len() - worst, pairs.len());
        }
        HeatKernelSummary::Skipped { reason } => {
            let _ = writeln!(out, "heat kernel: skipped ({reason})");
        }
    }
    match &r.s_transform {
        ChannelSummary::Computed { check, tail_bound } => {
            let _ = writeln!(out, "S-transform: {}  residual {}  tail {}", mark(check.passed), q(&check.residual), q(tail_bound));
        }
        ChannelSummary::Skipped { reason } => {
            let _ = writeln!(out, "S-transform: skipped ({reason})");
        }
    }
    for i in &r.indices {
        let _ = writeln!(out, "theta at {}: d(pi) {}  two-interval {}", i.boundary, q(&i.d_pi), q(&i.two_interval));
    }
    let _ = writeln!(out, "overall: {}", mark(r.all_passed));
    out
}
