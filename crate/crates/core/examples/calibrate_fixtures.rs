//! Regenerates the calibrated fixture vector tables `fixtures/en.vec` and
//! `fixtures/it.vec` from `fixtures/lexicon_en_it.tsv`.
//!
//! The tables are synthetic. Each word vector is placed so that its cosines
//! with the two anchors of its language take prescribed values, chosen so
//! that an audit over the fixture lexicon reproduces a fixed set of
//! published summary counts: intensity/direction bins per language,
//! per-cell post-translation sign counts, the anchor internal similarities
//! and a handful of exact word similarities.
//!
//! Run from the workspace root:
//!
//! ```text
//! cargo run -p lexbias-core --example calibrate_fixtures
//! ```

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};

use lexbias::lexicon::{parse_lexicon, GenderTag};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const DIM: usize = 12;
const SEED: u64 = 0x1e_b1a5;
/// Distance kept from bin edges when drawing a direction.
const EDGE_MARGIN: f64 = 0.008;

const EN_ANCHOR_COS: f64 = 0.61;
const IT_ANCHOR_COS: f64 = 0.85;

/// (female, male) counts per 0.1-wide |direction| bin.
const EN_BINS: [(usize, usize); 5] = [(67, 56), (57, 38), (71, 7), (30, 0), (6, 1)];
const IT_BINS: [(usize, usize); 3] = [(76, 123), (52, 55), (23, 4)];

/// (pre, post, female+, female-, male+, male-) sign counts of the
/// post-translation change per gender-shift cell.
const CELL_SIGNS: [(GenderTag, GenderTag, usize, usize, usize, usize); 9] = {
    use GenderTag::*;
    [
        (Neutral, Neutral, 30, 4, 34, 0),
        (Neutral, Masculine, 78, 13, 90, 1),
        (Neutral, Feminine, 28, 4, 32, 0),
        (Masculine, Neutral, 5, 1, 5, 1),
        (Masculine, Masculine, 66, 8, 68, 6),
        (Masculine, Feminine, 6, 1, 6, 1),
        (Feminine, Neutral, 4, 3, 7, 0),
        (Feminine, Masculine, 11, 2, 12, 1),
        (Feminine, Feminine, 57, 12, 67, 2),
    ]
};

/// Words with exact similarities: (en, sim she, sim he, it, sim lei, sim lui).
const PINNED: [(&str, f64, f64, &str, f64, f64); 8] = [
    ("architect", 0.211, 0.065, "architetto", 0.332, 0.422),
    ("doctor", 0.119, 0.137, "medico", 0.476, 0.502),
    ("liberal", 0.193, 0.209, "liberale", 0.341, 0.389),
    ("nurse", 0.556, 0.241, "infermiera", 0.624, 0.419),
    ("politician", 0.301, 0.413, "politico", 0.315, 0.428),
    ("salespeople", 0.130, 0.178, "venditori", 0.127, 0.230),
    ("socialists", 0.092, 0.249, "socialisti", 0.245, 0.284),
    ("surgeon", 0.049, -0.023, "chirurgo", 0.468, 0.498),
];

/// Extra Italian vocabulary outside the lexicon: (word, sim lei, sim lui).
const EXTRA_IT: [(&str, f64, f64); 1] = [("architetta", 0.49, 0.38)];

/// Preferred intensity bin (0-based) for representative example words.
const EN_PREFERRED: [(&str, usize); 18] = [
    ("barber", 0),
    ("baseball", 0),
    ("brilliant", 0),
    ("briefcase", 0),
    ("volleyball", 0),
    ("carpenter", 1),
    ("charming", 1),
    ("cheerful", 1),
    ("dictator", 1),
    ("adorable", 2),
    ("beautiful", 2),
    ("cosmetics", 2),
    ("homemaker", 2),
    ("housewife", 2),
    ("actress", 3),
    ("aunt", 3),
    ("fiance", 3),
    ("gorgeous", 3),
];
const EN_PREFERRED_TOP: [&str; 4] = ["maternity", "daughter", "girl", "sister"];
const IT_PREFERRED: [(&str, usize); 10] = [
    ("bellissimo", 0),
    ("casalinga", 0),
    ("rugby", 0),
    ("ballerina", 1),
    ("baseball", 1),
    ("cosmetici", 1),
    ("dittatore", 1),
    ("chitarrista", 1),
    ("zia", 2),
    ("imprenditrice", 2),
];
const IT_PREFERRED_TOP: [&str; 2] = ["calcio", "signora"];

#[derive(Clone, Copy, Debug, PartialEq)]
struct Slot {
    bin: usize,
    female: bool,
}

impl Slot {
    /// Signed interval of directions this slot allows.
    fn interval(self) -> (f64, f64) {
        let lo = self.bin as f64 * 0.1 + EDGE_MARGIN;
        let hi = (self.bin + 1) as f64 * 0.1 - EDGE_MARGIN;
        if self.female {
            (lo, hi)
        } else {
            (-hi, -lo)
        }
    }

    fn draw(self, rng: &mut ChaCha8Rng) -> f64 {
        let (lo, hi) = self.interval();
        rng.gen_range(lo..hi)
    }
}

fn pool(bins: &[(usize, usize)]) -> Vec<Slot> {
    let mut out = Vec::new();
    for (bin, &(f, m)) in bins.iter().enumerate() {
        out.extend(std::iter::repeat_n(Slot { bin, female: true }, f));
        out.extend(std::iter::repeat_n(Slot { bin, female: false }, m));
    }
    out
}

fn take(pool: &mut Vec<Slot>, want: Slot) -> Slot {
    let i = pool
        .iter()
        .position(|s| *s == want)
        .unwrap_or_else(|| panic!("slot {want:?} exhausted"));
    pool.swap_remove(i)
}

fn take_bin(pool: &mut Vec<Slot>, bin: usize, prefer_female: bool) -> Slot {
    let order = [prefer_female, !prefer_female];
    for female in order {
        if pool.contains(&Slot { bin, female }) {
            return take(pool, Slot { bin, female });
        }
    }
    panic!("bin {bin} exhausted")
}

fn slot_of(direction: f64) -> Slot {
    Slot {
        bin: (direction.abs() / 0.1).floor() as usize,
        female: direction > 0.0,
    }
}

struct Plan {
    source: String,
    target: String,
    en_slot: Option<Slot>,
    it_slot: Option<Slot>,
    /// (female-channel positive, male-channel positive)
    signs: Option<(bool, bool)>,
    pinned: Option<(f64, f64, f64, f64)>,
}

/// Builds a vector of unit length whose cosines with `female` = e0 and
/// `male` = c·e0 + s·e1 are `(sim_female, sim_male)`. The remaining mass
/// goes in a random direction orthogonal to both anchors.
fn place(sim_female: f64, sim_male: f64, anchor_cos: f64, rng: &mut ChaCha8Rng) -> Option<Vec<f64>> {
    let s = (1.0 - anchor_cos * anchor_cos).sqrt();
    let a = sim_female;
    let b = (sim_male - anchor_cos * sim_female) / s;
    let rest = 1.0 - a * a - b * b;
    if rest < 0.05 {
        return None;
    }
    let mut r: Vec<f64> = (0..DIM - 2).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let n = r.iter().map(|x| x * x).sum::<f64>().sqrt();
    r.iter_mut().for_each(|x| *x *= rest.sqrt() / n);
    let mut v = vec![a, b];
    v.extend(r);
    Some(v)
}

fn anchors(anchor_cos: f64) -> (Vec<f64>, Vec<f64>) {
    let mut f = vec![0.0; DIM];
    f[0] = 1.0;
    let mut m = vec![0.0; DIM];
    m[0] = anchor_cos;
    m[1] = (1.0 - anchor_cos * anchor_cos).sqrt();
    (f, m)
}

fn write_table(path: &str, rows: &BTreeMap<String, Vec<f64>>, rng: &mut ChaCha8Rng) -> std::io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "{} {}", rows.len(), DIM)?;
    for (word, v) in rows {
        // raw vectors are not unit length in real tables either
        let scale: f64 = rng.gen_range(0.5..4.0);
        write!(w, "{word}")?;
        for c in v {
            write!(w, " {:.9}", c * scale)?;
        }
        writeln!(w)?;
    }
    w.flush()
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let lexicon = parse_lexicon(BufReader::new(File::open("fixtures/lexicon_en_it.tsv")?), "en", "it")?.lexicon;

    let mut en_pool = pool(&EN_BINS);
    let mut it_pool = pool(&IT_BINS);
    let mut sign_pools: HashMap<(GenderTag, GenderTag), Vec<(bool, bool)>> = HashMap::new();
    for (pre, post, fp, fneg, mp, mneg) in CELL_SIGNS {
        let mut xs: Vec<bool> = [vec![true; fp], vec![false; fneg]].concat();
        let mut ys: Vec<bool> = [vec![true; mp], vec![false; mneg]].concat();
        xs.shuffle(&mut rng);
        ys.shuffle(&mut rng);
        sign_pools.insert((pre, post), xs.into_iter().zip(ys).collect());
    }

    let mut plans: Vec<Plan> = Vec::new();
    for e in lexicon.entries() {
        let t = e.target.as_ref().expect("fixture lexicon is fully translated");
        plans.push(Plan {
            source: e.source.surface.clone(),
            target: t.surface.clone(),
            en_slot: None,
            it_slot: None,
            signs: None,
            pinned: None,
        });
    }
    let cell_of: HashMap<String, (GenderTag, GenderTag)> = lexicon
        .entries()
        .iter()
        .map(|e| {
            (
                e.source.surface.clone(),
                (e.source.gender, e.target.as_ref().unwrap().gender),
            )
        })
        .collect();

    let take_signs = |pools: &mut HashMap<_, Vec<(bool, bool)>>, cell, want: Option<(bool, bool)>| {
        let p: &mut Vec<(bool, bool)> = pools.get_mut(&cell).unwrap();
        let i = match want {
            Some(w) => p.iter().position(|s| *s == w).expect("sign budget"),
            None => 0,
        };
        p.swap_remove(i)
    };

    // pinned words
    for (en, sf, sm, it, lf, lm) in PINNED {
        let plan = plans
            .iter_mut()
            .find(|p| p.source == en)
            .expect("pinned word in lexicon");
        assert_eq!(plan.target, it);
        plan.en_slot = Some(take(&mut en_pool, slot_of(sf - sm)));
        plan.it_slot = Some(take(&mut it_pool, slot_of(lf - lm)));
        let signs = (lf - sf > 0.0, lm - sm > 0.0);
        plan.signs = Some(take_signs(&mut sign_pools, cell_of[en], Some(signs)));
        plan.pinned = Some((sf, sm, lf, lm));
    }
    // representative examples
    for (w, bin) in EN_PREFERRED {
        let plan = plans
            .iter_mut()
            .find(|p| p.source == w)
            .expect("example word in lexicon");
        plan.en_slot = Some(take_bin(&mut en_pool, bin, true));
    }
    for w in EN_PREFERRED_TOP {
        let plan = plans
            .iter_mut()
            .find(|p| p.source == w)
            .expect("example word in lexicon");
        plan.en_slot = Some(take_bin(&mut en_pool, if w == "maternity" { 3 } else { 4 }, true));
    }
    for (w, bin) in IT_PREFERRED {
        let plan = plans
            .iter_mut()
            .find(|p| p.target == w)
            .expect("example word in lexicon");
        plan.it_slot = Some(take_bin(&mut it_pool, bin, true));
    }
    for w in IT_PREFERRED_TOP {
        let plan = plans
            .iter_mut()
            .find(|p| p.target == w)
            .expect("example word in lexicon");
        plan.it_slot = Some(take_bin(&mut it_pool, 2, w != "calcio"));
    }

    // change signs for everyone else
    for plan in plans.iter_mut().filter(|p| p.signs.is_none()) {
        plan.signs = Some(take_signs(&mut sign_pools, cell_of[&plan.source], None));
    }
    assert!(sign_pools.values().all(Vec::is_empty));

    // mixed-sign words constrain (en, it) slot pairs: female+/male- needs
    // d_it > d_en, female-/male+ needs d_it < d_en
    en_pool.shuffle(&mut rng);
    it_pool.shuffle(&mut rng);
    let feasible = |en: Slot, it: Slot, signs: (bool, bool)| -> bool {
        let (el, eh) = en.interval();
        let (il, ih) = it.interval();
        match signs {
            (true, false) => ih - el > 0.03,
            (false, true) => eh - il > 0.03,
            _ => true,
        }
    };
    let mut order: Vec<usize> = (0..plans.len()).collect();
    order.sort_by_key(|&i| matches!(plans[i].signs, Some((true, true)) | Some((false, false))));
    for i in order {
        let signs = plans[i].signs.unwrap();
        match (plans[i].en_slot, plans[i].it_slot) {
            (Some(_), Some(_)) => {}
            (Some(en), None) => {
                let j = it_pool.iter().position(|&it| feasible(en, it, signs)).expect("it slot");
                plans[i].it_slot = Some(it_pool.swap_remove(j));
            }
            (None, Some(it)) => {
                let j = en_pool.iter().position(|&en| feasible(en, it, signs)).expect("en slot");
                plans[i].en_slot = Some(en_pool.swap_remove(j));
            }
            (None, None) => {
                let (a, b) = (0..en_pool.len())
                    .flat_map(|a| (0..it_pool.len()).map(move |b| (a, b)))
                    .find(|&(a, b)| feasible(en_pool[a], it_pool[b], signs))
                    .expect("slot pair");
                plans[i].en_slot = Some(en_pool.swap_remove(a));
                plans[i].it_slot = Some(it_pool.swap_remove(b));
            }
        }
    }
    assert!(en_pool.is_empty() && it_pool.is_empty());

    let mut en_rows = BTreeMap::new();
    let mut it_rows = BTreeMap::new();
    let (f, m) = anchors(EN_ANCHOR_COS);
    en_rows.insert("she".to_owned(), f);
    en_rows.insert("he".to_owned(), m);
    let (f, m) = anchors(IT_ANCHOR_COS);
    it_rows.insert("lei".to_owned(), f);
    it_rows.insert("lui".to_owned(), m);
    for (w, lf, lm) in EXTRA_IT {
        it_rows.insert(w.to_owned(), place(lf, lm, IT_ANCHOR_COS, &mut rng).expect("feasible"));
    }

    for plan in &plans {
        let (en_v, it_v) = loop {
            let (sf, sm, lf, lm) = match plan.pinned {
                Some(p) => p,
                None => {
                    let d_en = plan.en_slot.unwrap().draw(&mut rng);
                    let d_it = plan.it_slot.unwrap().draw(&mut rng);
                    let delta = d_it - d_en;
                    let u = rng.gen_range(0.02..0.22);
                    let (dx, dy) = match plan.signs.unwrap() {
                        (true, true) => {
                            let t = (-delta).max(0.0) + u;
                            (delta + t, t)
                        }
                        (false, false) => {
                            let s = (-delta).max(0.0) + u;
                            (-s, -s - delta)
                        }
                        (true, false) | (false, true) => {
                            let v = rng.gen_range(0.2..0.8);
                            (delta * v, delta * (v - 1.0))
                        }
                    };
                    if dx.abs() < 0.005 || dy.abs() < 0.005 || dx.signum() != sign(plan.signs.unwrap().0) {
                        continue;
                    }
                    if dy.signum() != sign(plan.signs.unwrap().1) {
                        continue;
                    }
                    let sm = rng.gen_range(-0.05..0.35);
                    (sm + d_en, sm, sm + d_en + dx, sm + dy)
                }
            };
            let en_v = place(sf, sm, EN_ANCHOR_COS, &mut rng);
            let it_v = place(lf, lm, IT_ANCHOR_COS, &mut rng);
            match (en_v, it_v) {
                (Some(a), Some(b)) => break (a, b),
                _ if plan.pinned.is_some() => panic!("pinned word {} infeasible", plan.source),
                _ => continue,
            }
        };
        en_rows.insert(plan.source.clone(), en_v);
        it_rows.insert(plan.target.clone(), it_v);
    }

    write_table("fixtures/en.vec", &en_rows, &mut rng)?;
    write_table("fixtures/it.vec", &it_rows, &mut rng)?;
    println!("wrote {} en and {} it vectors", en_rows.len(), it_rows.len());
    Ok(())
}

fn sign(positive: bool) -> f64 {
    if positive {
        1.0
    } else {
        -1.0
    }
}
