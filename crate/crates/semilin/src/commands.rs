//! One function per subcommand. Each re-checks its own result before
//! reporting success.

use std::fmt::Write as _;

use semilin_core::bform::{b_darboux, b_pullback, BForm};
use semilin_core::cotangent::{check_hamiltonian, dmu_rank, lift_representation, moment_map, orbit_dimension_at, strata_scan, Sampler};
use semilin_core::field::VectorFieldJet;
use semilin_core::jet::Jet;
use semilin_core::lie::{check_representation, linear_part, pushforward_rep, sl2, Representation};
use semilin_core::linearize::linearize_rep;
use semilin_core::numeric::{bracket_residual_numeric, cairns_ghys_fields, cone_scan, DEFAULT_HALF_WIDTH};
use semilin_core::poisson::{split_defect, weinstein_split};
use semilin_core::polymap::PolyMap;
use semilin_core::scalar::{max_abs, Scalar};
use semilin_core::symplectic::{check_symplectic, commutation_residual, darboux, equivariant_darboux, standard_symplectic};

use crate::doc::{self, BivectorDoc, FormDoc, RepDoc};
use crate::{Failure, Output, Settings};

/// Sampling box for random strata scans: coordinates `k / 7` in `[-3, 3]`.
const SCAN_HALF_WIDTH: i64 = 3;
const SCAN_DENOMINATOR: i64 = 7;
/// Grid on the zero section and one fibre: `(2k + 1)^n` points per plane.
const GRID_SIDE: i64 = 8;
const GRID_HALF_WIDTH: i64 = 2;
/// Share of rank-3 samples required outside the cone.
const OUTSIDE_RANK3_SHARE: f64 = 0.99;
const DEMO_BRACKET_POINTS: usize = 100;

struct Verdict {
    text: String,
    failures: Vec<String>,
}

impl Verdict {
    fn new(title: &str) -> Self {
        Verdict {
            text: format!("# {title}\n"),
            failures: Vec::new(),
        }
    }

    fn line(&mut self, key: &str, value: impl std::fmt::Display) {
        writeln!(self.text, "{key}: {value}").unwrap();
    }

    /// Records a residual and whether it passes.
    fn residual<S: Scalar>(&mut self, key: &str, r: &S, settings: &Settings) {
        self.line(key, r);
        if !settings.passes(r) {
            self.failures.push(format!("{key} = {r}"));
        }
    }

    fn fail(&mut self, reason: String) {
        self.failures.push(reason);
    }

    fn finish(mut self) -> Result<Output, Failure> {
        if self.failures.is_empty() {
            self.line("status", "ok");
            Ok(Output::report(self.text))
        } else {
            self.line("status", "FAILED");
            Err(Failure::Verify {
                report: self.text,
                reason: self.failures.join("; "),
                csv: None,
            })
        }
    }
}

fn write_map<S: Scalar>(v: &mut Verdict, key: &str, m: &PolyMap<S>, names: &[String]) {
    for (i, c) in m.comps().iter().enumerate() {
        v.line(&format!("{key}[{}]", names[i]), c.display_with(names));
    }
}

fn write_field<S: Scalar>(v: &mut Verdict, key: &str, f: &VectorFieldJet<S>, names: &[String]) {
    for (i, c) in f.comps().iter().enumerate() {
        v.line(&format!("{key}[{}]", names[i]), c.display_with(names));
    }
}

fn rep_order(doc: &RepDoc, settings: &Settings) -> u32 {
    settings.order.unwrap_or(doc.rep.order)
}

fn field_residual<S: Scalar>(a: &[VectorFieldJet<S>], b: &[VectorFieldJet<S>]) -> S {
    let r: Vec<S> = a.iter().zip(b).map(|(x, y)| x.sub(y).max_abs_coeff()).collect();
    max_abs(r.iter())
}

pub fn verify_rep<S: Scalar>(settings: &Settings) -> Result<Output, Failure> {
    let doc: RepDoc = doc::read(settings.input()?)?;
    let rep = doc.build::<S>(rep_order(&doc, settings))?;
    let mut v = Verdict::new("verify-rep");
    v.line("order", rep.order());
    let alg = rep.algebra().check();
    v.line("antisymmetry violations", alg.antisymmetry.len());
    v.line("jacobi violations", alg.jacobi.len());
    if !alg.is_ok() {
        v.fail("structure constants do not define a Lie algebra".into());
    }
    let check = check_representation(&rep);
    for ((i, j), r) in &check.pairs {
        v.line(&format!("relation[{i},{j}]"), r);
    }
    v.residual("residual", &check.residual, settings);
    v.finish()
}

pub fn linearize<S: Scalar>(settings: &Settings) -> Result<Output, Failure> {
    let doc: RepDoc = doc::read(settings.input()?)?;
    let order = rep_order(&doc, settings);
    let rep = doc.build::<S>(doc.rep.order.max(order))?;
    let names = doc.names()?;
    let out = linearize_rep(&rep, order)?;
    let mut v = Verdict::new("linearize");
    v.line("order", order);
    for (k, d) in &out.defects {
        v.line(&format!("defect[{k}]"), d);
    }
    write_map(&mut v, "map", &out.map, &names);
    // independent check: push the input forward again and compare with its linear part
    let pushed = pushforward_rep(&rep.with_order(order), &out.map)?;
    let target = Representation::linear(rep.algebra().clone(), &linear_part(&rep), order)?;
    v.residual("residual", &field_residual(pushed.fields(), target.fields()), settings);
    v.finish()
}

pub fn darboux_cmd<S: Scalar>(settings: &Settings) -> Result<Output, Failure> {
    let doc: FormDoc = doc::read(settings.input()?)?;
    let order = settings.order.unwrap_or(doc.order);
    let omega = doc.build::<S>(doc.order.max(order))?;
    if omega.degree() != 2 {
        return Err(Failure::Usage("darboux needs a 2-form".into()));
    }
    let names = doc.names()?;
    let mut v = Verdict::new("darboux");
    v.line("order", order);
    let check = check_symplectic(&omega.with_order(order));
    v.line("closed residual", &check.closed_residual);
    v.line("rank at origin", check.rank_at_origin);
    let out = darboux(&omega, order)?;
    write_map(&mut v, "map", &out.map, &names);
    let pulled = omega.with_order(order).pullback(&out.map)?.with_order(order);
    let residual = pulled.sub(&standard_symplectic(omega.nvars(), order)).max_abs_coeff();
    v.residual("pullback residual", &residual, settings);
    v.finish()
}

pub fn equivariant_darboux_cmd<S: Scalar>(settings: &Settings) -> Result<Output, Failure> {
    let doc: FormDoc = doc::read(settings.input()?)?;
    let order = settings.order.unwrap_or(doc.order);
    let omega = doc.build::<S>(doc.order.max(order))?;
    if omega.degree() != 2 {
        return Err(Failure::Usage("equivariant-darboux needs a 2-form".into()));
    }
    let (g, lp) = doc.action::<S>()?;
    let names = doc.names()?;
    let mut v = Verdict::new("equivariant-darboux");
    v.line("order", order);
    v.residual("action relation residual", &lp.relation_residual(&g), settings);
    let map = equivariant_darboux(&omega, &lp, order)?;
    write_map(&mut v, "map", &map, &names);
    let pulled = omega.with_order(order).pullback(&map)?.with_order(order);
    let residual = pulled.sub(&standard_symplectic(omega.nvars(), order)).max_abs_coeff();
    v.residual("pullback residual", &residual, settings);
    for (i, r) in commutation_residual(&map, &lp)?.iter().enumerate() {
        v.residual(&format!("commutation[{i}]"), r, settings);
    }
    v.finish()
}

/// The lift of `rep`, raised one order so the fibre components are complete.
fn lift<S: Scalar>(rep: &Representation<S>) -> Representation<S> {
    lift_representation(&rep.with_order(rep.order() + 1))
}

pub fn cotangent_lift_cmd<S: Scalar>(settings: &Settings) -> Result<Output, Failure> {
    let doc: RepDoc = doc::read(settings.input()?)?;
    let rep = doc.build::<S>(rep_order(&doc, settings))?;
    let names = doc.cotangent_names()?;
    let lifted = lift(&rep);
    let mut v = Verdict::new("cotangent-lift");
    v.line("order", lifted.order());
    for (i, f) in lifted.fields().iter().enumerate() {
        write_field(&mut v, &format!("lift[{}]", rep.algebra().names()[i]), f, &names);
    }
    let base = check_representation(&rep).residual;
    let lifted_residual = check_representation(&lifted).residual;
    v.line("base residual", &base);
    v.residual("lift residual", &lifted_residual, settings);
    let mu = moment_map(&rep);
    let ham: Vec<S> = lifted.fields().iter().zip(&mu).map(|(f, m)| check_hamiltonian(f, m)).collect();
    v.residual("hamiltonian residual", &max_abs(ham.iter()), settings);
    v.finish()
}

pub fn moment_map_cmd<S: Scalar>(settings: &Settings) -> Result<Output, Failure> {
    let doc: RepDoc = doc::read(settings.input()?)?;
    let rep = doc.build::<S>(rep_order(&doc, settings))?;
    let names = doc.cotangent_names()?;
    let mu = moment_map(&rep);
    let lifted = lift(&rep);
    let mut v = Verdict::new("moment-map");
    v.line("order", mu.first().map_or(0, Jet::order));
    let gnames = rep.algebra().names().to_vec();
    for (i, m) in mu.iter().enumerate() {
        v.line(&format!("mu[{}]", gnames[i]), m.display_with(&names));
    }
    for (i, (f, m)) in lifted.fields().iter().zip(&mu).enumerate() {
        v.residual(&format!("hamiltonian[{}]", gnames[i]), &check_hamiltonian(f, m), settings);
    }
    v.finish()
}

pub fn orbit_dim<S: Scalar>(settings: &Settings) -> Result<Output, Failure> {
    let doc: RepDoc = doc::read(settings.input()?)?;
    let rep = doc.build::<S>(rep_order(&doc, settings))?;
    let points = doc.points::<S>()?;
    if points.is_empty() {
        return Err(Failure::Usage("orbit-dim needs `points` in the input".into()));
    }
    let mut v = Verdict::new("orbit-dim");
    for (k, pt) in points.iter().enumerate() {
        let coords: Vec<String> = pt.iter().map(|c| c.to_string()).collect();
        v.line(&format!("point[{k}]"), format!("({}) rank {}", coords.join(", "), orbit_dimension_at(&rep, pt)));
    }
    v.finish()
}

fn csv_header(names: &[String]) -> String {
    let mut h = names.join(",");
    h.push_str(",rank\n");
    h
}

pub fn strata_scan_cmd<S: Scalar>(settings: &Settings) -> Result<Output, Failure> {
    let doc: RepDoc = doc::read(settings.input()?)?;
    let rep = doc.build::<S>(rep_order(&doc, settings))?;
    let names = doc.cotangent_names()?;
    let sampler = match settings.seed {
        Some(seed) => Sampler::RandomBox {
            seed,
            samples: settings.samples.unwrap_or(1000),
            half_width: SCAN_HALF_WIDTH,
            denominator: SCAN_DENOMINATOR,
        },
        None if settings.samples.is_some() => {
            return Err(Failure::Usage("--samples draws random points and needs --seed".into()));
        }
        None => Sampler::ZeroSectionAndFiber {
            side: GRID_SIDE,
            half_width: GRID_HALF_WIDTH,
        },
    };
    let mu = moment_map(&rep);
    let report = strata_scan(&mu, &sampler);
    let mut csv = csv_header(&names);
    for (pt, rank) in &report.samples {
        let row: Vec<String> = pt.iter().map(|c| c.to_string()).collect();
        writeln!(csv, "{},{rank}", row.join(",")).unwrap();
    }
    let mut v = Verdict::new("strata-scan");
    v.line("samples", report.total);
    for (rank, count) in &report.counts {
        v.line(&format!("rank {rank}"), format!("{count} ({:.2}%)", 100.0 * report.fraction(*rank)));
    }
    // at each witness the rank of dμ must equal the orbit dimension of the lift
    let lifted = lift(&rep);
    for (rank, pt) in &report.witnesses {
        let coords: Vec<String> = pt.iter().map(|c| c.to_string()).collect();
        let orbit = orbit_dimension_at(&lifted, pt);
        let again = dmu_rank(&mu, pt);
        v.line(&format!("witness rank {rank}"), format!("({}) orbit dimension {orbit}", coords.join(", ")));
        if orbit != *rank || again != *rank {
            v.fail(format!("witness of rank {rank} has orbit dimension {orbit}"));
        }
    }
    let summary = v.finish();
    Output::with_csv(summary, csv)
}

pub fn b_darboux_cmd<S: Scalar>(settings: &Settings) -> Result<Output, Failure> {
    let doc: BivectorDoc = doc::read(settings.input()?)?;
    let order = settings.order.unwrap_or(doc.order);
    let (omega, from_bivector) = doc.b_form::<S>(doc.order.max(order))?;
    let order = order.min(omega.order());
    let names = doc.names()?;
    let mut v = Verdict::new("b-darboux");
    v.line("input", if from_bivector { "bivector" } else { "b-form" });
    v.line("order", order);
    v.residual("b-closed residual", &omega.b_d().max_abs_coeff(), settings);
    let out = b_darboux(&omega, order)?;
    write_map(&mut v, "map", &out.map, &names);
    let pulled = b_pullback(&omega.with_order(order), &out.map)?;
    let residual = pulled.sub(&BForm::standard(omega.nvars(), order)).max_abs_coeff();
    v.residual("pullback residual", &residual, settings);
    let z = omega.z();
    if out.map.comp(z).div_var(z).is_none() {
        v.fail(format!("component {} is not divisible by {}", names[z], names[z]));
    }
    v.finish()
}

pub fn split<S: Scalar>(settings: &Settings) -> Result<Output, Failure> {
    let doc: BivectorDoc = doc::read(settings.input()?)?;
    let order = settings.order.unwrap_or(doc.order);
    let pi = doc.bivector::<S>(doc.order.max(order))?;
    let names = doc.names()?;
    let mut v = Verdict::new("split");
    v.line("order", order);
    v.residual("poisson residual", &pi.with_order(order).check_poisson(), settings);
    let out = weinstein_split(&pi, order)?;
    v.line("rank", out.rank);
    write_map(&mut v, "map", &out.map, &names);
    for (i, j, f) in &out.transverse {
        v.line(&format!("transverse[{i},{j}]"), f.to_canonical());
    }
    // push the input forward again rather than trusting `out.pushed`
    let pushed = pi.with_order(order).pushforward(&out.map)?;
    v.residual("split defect", &split_defect(&pushed, out.rank), settings);
    v.finish()
}

pub fn demo_cairns_ghys(settings: &Settings) -> Result<Output, Failure> {
    let seed = settings
        .seed
        .ok_or_else(|| Failure::Usage("demo cairns-ghys needs --seed".into()))?;
    let samples = settings.samples.unwrap_or(1000);
    if samples == 0 {
        return Err(Failure::Usage("--samples must be positive".into()));
    }
    let fields = cairns_ghys_fields();
    let scan = cone_scan(&fields, seed, samples, DEFAULT_HALF_WIDTH)?;
    let mut csv = csv_header(&["x".into(), "y".into(), "z".into()]);
    for p in &scan {
        writeln!(csv, "{},{},{},{}", p.point[0], p.point[1], p.point[2], p.rank).unwrap();
    }
    let (inside, outside): (Vec<_>, Vec<_>) = scan.iter().partition(|p| p.inside_cone);
    let full_outside = outside.iter().filter(|p| p.rank == 3).count();
    let full_inside = inside.iter().filter(|p| p.rank == 3).count();
    let share = full_outside as f64 / outside.len() as f64;
    let mut v = Verdict::new("demo cairns-ghys");
    v.line("seed", seed);
    v.line("box", format!("[-{DEFAULT_HALF_WIDTH}, {DEFAULT_HALF_WIDTH}]^3"));
    v.line("outside rank 3", format!("{full_outside}/{} ({:.1}%)", outside.len(), 100.0 * share));
    v.line("inside rank 3", format!("{full_inside}/{}", inside.len()));
    if share < OUTSIDE_RANK3_SHARE {
        v.fail(format!("rank 3 at only {:.1}% outside the cone", 100.0 * share));
    }
    if full_inside > 0 {
        v.fail(format!("rank 3 at {full_inside} points inside the cone"));
    }
    let pts: Vec<Vec<f64>> = scan.iter().take(DEMO_BRACKET_POINTS).map(|p| p.point.to_vec()).collect();
    let residual = bracket_residual_numeric(&fields, &sl2::<f64>(), &pts)?;
    v.line("bracket residual", format!("{residual:.3e}"));
    if residual >= settings.tolerance.unwrap_or(1e-9) {
        v.fail(format!("bracket residual {residual:e}"));
    }
    Output::with_csv(v.finish(), csv)
}
