//! The claim suite behind `upb reproduce`.

use std::collections::BTreeSet;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use upb_core::basis::{check_pairwise_orthogonality, check_unextendible, ORTHO_TOL};
use upb_core::catalog::{self, builtin, family11_1_chain, family11_chain, CatalogEntry};
use upb_core::coarse::{all_partitions, classify_upb_across_grainings, coarse_grain, shared_component_witness};
use upb_core::gme::{
    analytic_max_overlap, ebits, general_g, h_plus_branch, h_plus_branch_stationary_points, monotonicity_check,
    overlap, symmetric_slice_grid, OptimizationPoint,
};
use upb_core::linalg::{kron, span_dimension, tensor_product, Ket, RANK_TOL};
use upb_core::ppt::{
    bipartitions, certify_entangled_range, coefficient_matrix, is_ppt, orthogonality_deviation, psi_states,
    reduced_ranks, rho_family, rho_forms,
};
use upb_core::uom::{apply_transform, instantiate, verify_chain, Pair, Symbol, SymbolicUom, TransformStep};
use upb_core::{seesaw_maximize, AngleAssignment, CoarsePartition, PartyLayout, Result, SeesawOptions};

use crate::CliError;

pub const CLAIM_COUNT: usize = 10;

const DESCRIPTIONS: [&str; CLAIM_COUNT] = [
    "size-6 set: unextendible, UPB only at AB|C|D among 13 grainings",
    "size-7 set: unextendible, no graining is a UPB, witnesses verified",
    "size-9 sets: 6 three-block and 3 two-by-two UPB grainings",
    "both transformation chains replay symbol for symbol, U2 = U4",
    "span dimensions of AB- and CD-side vectors of the 11th size-9 UPB",
    "rank-7 state: trace 1, flat spectrum, PPT on all cuts, entangled",
    "coefficient matrix orthogonal, psi expansions agree with rho",
    "maximal product overlap and geometric measure at angles pi/4",
    "G nonincreasing along A|B|C|D, A|B|CD, AB|CD",
    "refinement, closed-form, see-saw and transform property checks",
];

#[derive(Clone, Debug, Serialize)]
pub struct ClaimRecord {
    pub claim: String,
    pub description: String,
    pub computed: Value,
    pub expected: Value,
    pass: bool,
    #[serde(skip)]
    pub runtime_s: f64,
}

impl ClaimRecord {
    pub fn pass(&self) -> bool {
        self.pass
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ReproductionReport {
    pub claims: Vec<ClaimRecord>,
}

impl ReproductionReport {
    pub fn all_pass(&self) -> bool {
        self.claims.iter().all(|c| c.pass)
    }

    /// Runtimes are left out unless requested, so that identical runs give
    /// identical documents.
    pub fn to_json(&self, timings: bool) -> Value {
        let claims: Vec<Value> = self
            .claims
            .iter()
            .map(|c| {
                let mut v = serde_json::to_value(c).expect("serializable");
                if timings {
                    v["runtime_s"] = json!(c.runtime_s);
                }
                v
            })
            .collect();
        json!({
            "claims": claims,
            "passed": self.claims.iter().filter(|c| c.pass).count(),
            "total": self.claims.len(),
        })
    }

    pub fn write_text(&self, out: &mut dyn Write, timings: bool) -> std::io::Result<()> {
        for c in &self.claims {
            let word = if c.pass { "PASS" } else { "FAIL" };
            let time = if timings { format!(" [{:.2}s]", c.runtime_s) } else { String::new() };
            writeln!(out, "{word} {:<4}{time} {}", c.claim, c.description)?;
            writeln!(out, "     computed {}", c.computed)?;
            if !c.pass {
                writeln!(out, "     expected {}", c.expected)?;
            }
        }
        let passed = self.claims.iter().filter(|c| c.pass).count();
        writeln!(out, "{passed} of {} claims passed", self.claims.len())
    }
}

type Claim = Result<(Value, Value)>;

fn q4() -> PartyLayout {
    PartyLayout::qubits(4)
}

fn part(s: &str) -> CoarsePartition {
    CoarsePartition::parse(s, &q4()).expect("valid partition")
}

fn angle_sample() -> Vec<AngleAssignment> {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut v = vec![AngleAssignment::all_pi_over_4()];
    for _ in 0..5 {
        let mut draw = || rng.random_range(0.05..std::f64::consts::FRAC_PI_2 - 0.05);
        v.push(AngleAssignment::new(draw(), draw(), draw(), draw()).expect("inside the open interval"));
    }
    v
}

fn claim_1() -> Claim {
    let r = classify_upb_across_grainings(&builtin("size6")?.instantiate()?)?;
    Ok((
        json!({ "unextendible": r.fine_unextendible, "upb_grainings": r.upb_partitions(), "two_by_two": r.two_by_two_count }),
        json!({ "unextendible": true, "upb_grainings": ["AB|C|D"], "two_by_two": 0 }),
    ))
}

fn claim_2() -> Claim {
    let basis = builtin("size7")?.instantiate()?;
    let r = classify_upb_across_grainings(&basis)?;
    let mut verified = 0;
    for g in &r.grainings {
        if let Some(w) = &g.witness {
            if coarse_grain(&basis, &g.blocks)?.max_overlap_with(w) <= 1e-10 {
                verified += 1;
            }
        }
    }
    let shortcut = r.grainings.iter().filter(|g| g.resolved_by_shortcut).count();
    let one = Ket::basis(2, 1);
    let pattern = shared_component_witness(&basis, [2, 3], 0)?.is_some_and(|w| {
        let c = w.witness.components();
        c[0].projective_eq(&one, 1e-12) && c[1].projective_eq(&one, 1e-12)
    });
    Ok((
        json!({
            "unextendible": r.fine_unextendible,
            "upb_grainings": r.upb_partitions(),
            "witnesses_verified": verified,
            "resolved_by_dimension": shortcut,
            "a_b_cd_witness_is_11p": pattern,
        }),
        json!({
            "unextendible": true,
            "upb_grainings": Vec::<String>::new(),
            "witnesses_verified": 13 - shortcut,
            "resolved_by_dimension": shortcut,
            "a_b_cd_witness_is_11p": true,
        }),
    ))
}

fn claim_3(table: Option<&Path>) -> Claim {
    let eleventh = builtin("size9-11th")?;
    let alone = catalog::reproduce_counts(std::slice::from_ref(&eleventh))?;
    let mut computed = json!({ "eleventh": [alone.three_block_count, alone.two_by_two_count] });
    let mut expected = json!({ "eleventh": [6, 3] });
    if let Some(path) = table {
        let entries = catalog::load_table(path, true)?;
        let all = catalog::reproduce_counts(&entries)?;
        let first: usize = all
            .entries
            .iter()
            .take(entries.len().saturating_sub(1))
            .map(|c| c.three_block.len() + c.two_by_two.len())
            .sum();
        computed["table"] = json!({ "entries": entries.len(), "totals": [all.three_block_count, all.two_by_two_count], "before_last": first });
        expected["table"] = json!({ "entries": 11, "totals": [6, 3], "before_last": 0 });
    }
    Ok((computed, expected))
}

fn claim_4() -> Claim {
    let first = family11_chain();
    let second = family11_1_chain();
    Ok((
        json!({ "first": verify_chain(&first), "second": verify_chain(&second), "u2_equals_u4": first[1].0 == first[3].0 }),
        json!({ "first": true, "second": true, "u2_equals_u4": true }),
    ))
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

fn claim_5() -> Claim {
    let basis = instantiate(&builtin("size9-11th")?.uom, &AngleAssignment::generic())?;
    let side = |p: [usize; 2]| -> Vec<Ket> {
        basis.members().iter().map(|m| kron(m.component(p[0]), m.component(p[1]))).collect()
    };
    let rank = |vs: &[Ket], idx: &[usize]| span_dimension(&idx.iter().map(|&i| vs[i].clone()).collect::<Vec<_>>(), RANK_TOL);
    let (ab, cd) = (side([0, 1]), side([2, 3]));
    let mut six = BTreeSet::new();
    for vs in [&ab, &cd] {
        for s in subsets(9, 6) {
            six.insert(rank(vs, &s)?);
        }
    }
    let mut low = Vec::new();
    for s in subsets(9, 5) {
        let r = rank(&ab, &s)?;
        if r != 4 {
            low.push((r, s.iter().map(|i| i + 1).collect::<Vec<_>>()));
        }
    }
    let exceptional = [[1, 2, 3, 4, 8], [1, 2, 3, 6, 7], [1, 4, 5, 6, 7], [2, 4, 5, 6, 8]];
    Ok((
        json!({ "six_subset_ranks": six, "rank_deficient_five_subsets": low }),
        json!({ "six_subset_ranks": [4], "rank_deficient_five_subsets": exceptional.map(|s| (3, s)) }),
    ))
}

fn claim_6() -> Claim {
    let cuts = bipartitions(4)?;
    let mut trace_dev = 0.0f64;
    let mut spectrum_dev = 0.0f64;
    let mut min_pt = f64::INFINITY;
    let mut marginal = BTreeSet::new();
    let mut certified = true;
    for angles in angle_sample() {
        let rho = rho_family(&angles)?;
        trace_dev = trace_dev.max((rho.op().trace() - 1.0).abs());
        for (i, v) in rho.spectrum()?.iter().enumerate() {
            let want = if i < 7 { 1.0 / 7.0 } else { 0.0 };
            spectrum_dev = spectrum_dev.max((v - want).abs());
        }
        for cut in &cuts {
            min_pt = min_pt.min(is_ppt(&rho, cut, 1e-10)?.min_eigenvalue);
        }
        let ranks = reduced_ranks(&rho)?;
        marginal.insert((ranks["AB"], ranks["CD"]));
        let upb = instantiate(&catalog::size9_column_lettered(), &angles)?;
        for cut in ["A|B|CD", "AB|CD"] {
            certified &= certify_entangled_range(&upb, &part(cut))?;
        }
    }
    let pass = trace_dev <= 1e-12 && spectrum_dev <= 1e-10 && min_pt >= -1e-10;
    Ok((
        json!({
            "tolerances_met": pass,
            "trace_deviation": trace_dev,
            "spectrum_deviation": spectrum_dev,
            "min_partial_transpose_eigenvalue": min_pt,
            "marginal_ranks_ab_cd": marginal,
            "entangled_at_a_b_cd_and_ab_cd": certified,
        }),
        json!({
            "tolerances_met": true,
            "trace_deviation": "<= 1e-12",
            "spectrum_deviation": "<= 1e-10",
            "min_partial_transpose_eigenvalue": ">= -1e-10",
            "marginal_ranks_ab_cd": [[4, 4]],
            "entangled_at_a_b_cd_and_ab_cd": true,
        }),
    ))
}

fn claim_7() -> Claim {
    let mut worst = [0.0f64; 4];
    for angles in angle_sample() {
        worst[0] = worst[0].max(orthogonality_deviation(&coefficient_matrix(&angles)?));
        let psi = psi_states(&angles)?;
        worst[1] = worst[1].max(psi.form_discrepancy);
        let primed: Vec<Ket> = ['a', 'b', 'c', 'd']
            .iter()
            .map(|&c| Symbol::letter(c, true).expect("letter").ket(&angles))
            .collect();
        worst[2] = worst[2].max(psi.states[0].max_abs_diff(&tensor_product(&primed)?));
        worst[3] = worst[3].max(rho_forms(&angles)?.max_discrepancy());
    }
    let pass = worst[0] <= 1e-12 && worst[1] <= 1e-12 && worst[2] <= 1e-12 && worst[3] <= 1e-10;
    Ok((
        json!({
            "tolerances_met": pass,
            "u_ut_deviation": worst[0],
            "psi_form_discrepancy": worst[1],
            "psi_1_deviation": worst[2],
            "rho_form_discrepancy": worst[3],
        }),
        json!({
            "tolerances_met": true,
            "u_ut_deviation": "<= 1e-12",
            "psi_form_discrepancy": "<= 1e-12",
            "psi_1_deviation": "<= 1e-12",
            "rho_form_discrepancy": "<= 1e-10",
        }),
    ))
}

fn claim_8() -> Claim {
    let rho = rho_family(&AngleAssignment::all_pi_over_4())?;
    let target = analytic_max_overlap();
    let r = seesaw_maximize(&rho, &CoarsePartition::trivial(4), &SeesawOptions::default())?;
    let (grid, _) = symmetric_slice_grid(&rho, 720)?;
    let [p0, p1] = h_plus_branch_stationary_points();
    let (h0, h1) = (h_plus_branch(p0), h_plus_branch(p1));
    let pass = (r.max_overlap - target).abs() <= 1e-6
        && (r.g_ebits - ebits(target)).abs() <= 1e-4
        && (grid - target).abs() <= 1e-5
        && h0.abs() <= 1e-10
        && (h1 - 1.0 / 126.0).abs() <= 1e-10;
    Ok((
        json!({
            "within_tolerance": pass,
            "max_overlap": r.max_overlap,
            "G_ebits": r.g_ebits,
            "symmetric_grid": grid,
            "branch_values": [h0, h1],
        }),
        json!({
            "within_tolerance": true,
            "max_overlap": target,
            "G_ebits": ebits(target),
            "symmetric_grid": target,
            "branch_values": [0.0, 1.0 / 126.0],
        }),
    ))
}

fn claim_9() -> Claim {
    let rho = rho_family(&AngleAssignment::all_pi_over_4())?;
    let chain = [CoarsePartition::trivial(4), part("A|B|CD"), part("AB|CD")];
    let rep = monotonicity_check(&rho, &chain, &SeesawOptions::default())?;
    Ok((
        json!({ "values": rep.values, "nonincreasing": rep.nonincreasing }),
        json!({ "nonincreasing": true }),
    ))
}

fn random_step(uom: &SymbolicUom, rng: &mut ChaCha8Rng) -> TransformStep {
    let cols = uom.column_count();
    let shuffled = |n: usize, rng: &mut ChaCha8Rng| {
        let mut perm: Vec<usize> = (0..n).collect();
        rand::seq::SliceRandom::shuffle(perm.as_mut_slice(), rng);
        perm
    };
    match rng.random_range(0..4) {
        0 => TransformStep::RowPermute { perm: shuffled(uom.row_count(), rng) },
        1 => TransformStep::ColumnPermute { perm: shuffled(cols, rng) },
        2 => {
            let pairs = uom.pairs();
            TransformStep::SymbolSwap {
                column: rng.random_range(0..cols),
                pair: pairs[rng.random_range(0..pairs.len())],
            }
        }
        _ => {
            let column = rng.random_range(0..cols);
            let used: Vec<Pair> = uom.column(column).iter().map(|s| s.pair).collect();
            let first = used[rng.random_range(0..used.len())];
            let second = Pair::LETTERS
                .iter()
                .map(|&c| Pair::Letter(c))
                .chain(std::iter::once(Pair::Computational))
                .find(|p| !used.contains(p))
                .expect("a column uses at most four of five pairs");
            TransformStep::BasisRelabel { column, first, second }
        }
    }
}

fn claim_10(table: Option<&Path>) -> Claim {
    let mut entries: Vec<CatalogEntry> = catalog::builtins();
    if let Some(p) = table {
        entries.extend(catalog::load_table(p, false)?);
    }

    let mut refinement_violations = 0;
    for entry in &entries {
        let basis = entry.instantiate()?;
        let parts = all_partitions(basis.layout().parties())?;
        let verdicts = parts
            .iter()
            .map(|p| coarse_grain(&basis, p).map(|g| check_unextendible(&g, ORTHO_TOL).unextendible))
            .collect::<Result<Vec<_>>>()?;
        for (i, fine) in parts.iter().enumerate() {
            for (j, coarse) in parts.iter().enumerate() {
                if i != j && fine.refines(coarse) && verdicts[j] && !verdicts[i] {
                    refinement_violations += 1;
                }
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let angles = AngleAssignment::generic();
    let rho = rho_family(&angles)?;
    let mut worst_g = 0.0f64;
    for _ in 0..100 {
        let mu = [0; 4].map(|_| rng.random_range(0.0..2.0 * std::f64::consts::PI));
        let nu = [0; 4].map(|_| rng.random_range(0.0..std::f64::consts::FRAC_PI_2));
        let p = OptimizationPoint::new(mu, nu)?;
        worst_g = worst_g.max((general_g(&angles, &p) - overlap(&rho, &p.to_product_vector())?).abs());
    }

    let quarter = rho_family(&AngleAssignment::all_pi_over_4())?;
    let opts = SeesawOptions { restarts: 16, ..SeesawOptions::default() };
    let mut monotone = true;
    for p in [CoarsePartition::trivial(4), part("A|B|CD"), part("AB|CD")] {
        monotone &= seesaw_maximize(&quarter, &p, &opts)?.monotone;
    }

    let mut changed = 0;
    for entry in &entries {
        let base = check_unextendible(&instantiate(&entry.uom, &angles)?, ORTHO_TOL).unextendible;
        for _ in 0..20 {
            let moved = apply_transform(&entry.uom, &random_step(&entry.uom, &mut rng))?;
            let basis = instantiate(&moved, &angles)?;
            let ok = check_pairwise_orthogonality(&basis, 1e-12).orthogonal
                && check_unextendible(&basis, ORTHO_TOL).unextendible == base;
            changed += usize::from(!ok);
        }
    }
    Ok((
        json!({
            "refinement_violations": refinement_violations,
            "closed_form_within_1e-10": worst_g <= 1e-10,
            "closed_form_max_deviation": worst_g,
            "seesaw_monotone": monotone,
            "transforms_changing_verdict": changed,
            "transforms_applied": 20 * entries.len(),
        }),
        json!({
            "refinement_violations": 0,
            "closed_form_within_1e-10": true,
            "closed_form_max_deviation": "<= 1e-10",
            "seesaw_monotone": true,
            "transforms_changing_verdict": 0,
            "transforms_applied": 20 * entries.len(),
        }),
    ))
}

/// Structural match: strings in `expected` are tolerances already folded
/// into a boolean key, and floats there are reference values for display.
fn matches(computed: &Value, expected: &Value) -> bool {
    match (computed, expected) {
        (_, Value::String(_)) => true,
        (Value::Number(_), Value::Number(n)) if n.is_f64() => true,
        (Value::Object(c), Value::Object(e)) => e.iter().all(|(k, want)| c.get(k).is_some_and(|got| matches(got, want))),
        (Value::Array(c), Value::Array(e)) => c.len() == e.len() && c.iter().zip(e).all(|(a, b)| matches(a, b)),
        _ => computed == expected,
    }
}

pub fn run_claims(ids: &[usize], table: Option<&Path>) -> std::result::Result<ReproductionReport, CliError> {
    if let Some(bad) = ids.iter().find(|&&i| i == 0 || i > CLAIM_COUNT) {
        return Err(CliError::usage(format!("no claim {bad}; claims are 1-{CLAIM_COUNT}")));
    }
    if let Some(p) = table {
        if !p.exists() {
            return Err(CliError::usage(format!("{}: no such file", p.display())));
        }
    }
    let mut claims = Vec::new();
    for &id in ids {
        let start = Instant::now();
        let outcome = match id {
            1 => claim_1(),
            2 => claim_2(),
            3 => claim_3(table),
            4 => claim_4(),
            5 => claim_5(),
            6 => claim_6(),
            7 => claim_7(),
            8 => claim_8(),
            9 => claim_9(),
            _ => claim_10(table),
        };
        let (computed, expected, pass) = match outcome {
            Ok((c, e)) => {
                let pass = matches(&c, &e);
                (c, e, pass)
            }
            Err(err) => (json!({ "error": err.to_string() }), Value::Null, false),
        };
        claims.push(ClaimRecord {
            claim: format!("C{id}"),
            description: DESCRIPTIONS[id - 1].to_string(),
            computed,
            expected,
            pass,
            runtime_s: start.elapsed().as_secs_f64(),
        });
    }
    Ok(ReproductionReport { claims })
}
