//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any
//! fails.

use std::collections::VecDeque;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use velopad::circuit::{read_pixel, Mechanisms, ReadoutConfig, ResistorNetwork};
use velopad::crosstalk::{
    characterize, crosstalk, crosstalk_frame, neighborhood, simulate_point, CrosstalkInput, NeighborhoodKind,
};
use velopad::io::{decode_stream, encode_wire, frame_len, ingest_external};
use velopad::pipeline::{
    adaptive_threshold, gaussian_blur, run_pipeline, square_and_normalize, PipelineConfig,
};
use velopad::session::{ConfigPatch, SessionConfig, Stimulus};
use velopad::simulate::PadSimulator;
use velopad::{Frame, SensorGeometry, Unit, WeightStimulus};

/// Collects failed checks of one criterion.
#[derive(Default)]
struct Checks {
    failures: Vec<String>,
    notes: Vec<String>,
}

impl Checks {
    fn check(&mut self, ok: bool, what: impl Into<String>) {
        if !ok {
            self.failures.push(what.into());
        }
    }

    fn note(&mut self, what: impl Into<String>) {
        self.notes.push(what.into());
    }
}

fn fixture(name: &str) -> PathBuf {
    [env!("CARGO_MANIFEST_DIR"), "tests", "fixtures", name].iter().collect()
}

fn rel_err(got: f64, want: f64) -> f64 {
    if want == 0.0 {
        got.abs()
    } else {
        ((got - want) / want).abs()
    }
}

// 1

fn worked_example(c: &mut Checks) {
    let input = CrosstalkInput::new(1.94, vec![(1.0, 0.15), (2f64.sqrt(), 0.0), (1.0, 0.04)]);
    let t = Instant::now();
    let v = crosstalk(&input).unwrap();
    let dt = t.elapsed();
    c.check((v.value - 0.02868).abs() < 1e-4, format!("direct C = {}", v.value));
    c.check(dt < Duration::from_millis(1), format!("took {dt:?}"));
    c.note(format!("C = {:.6} in {dt:?}", v.value));

    let text = std::fs::read_to_string(fixture("corner_frame.log")).unwrap();
    let (frames, errors) = ingest_external(&text);
    c.check(errors.is_empty() && frames.len() == 1, "corner fixture ingests cleanly");
    let v = crosstalk_frame(&frames[0].frame, (0, 0)).unwrap();
    c.check((v.value - 0.02868).abs() < 1e-4, format!("ingested C = {}", v.value));
}

// 2

fn random_input(rng: &mut ChaCha8Rng) -> CrosstalkInput {
    let rows = rng.gen_range(2..8);
    let cols = rng.gen_range(2..8);
    let s = (rng.gen_range(0..rows), rng.gen_range(0..cols));
    let hood = neighborhood(s, rows, cols).unwrap();
    let p0 = rng.gen_range(0.01..5.0);
    let neighbors = hood
        .members
        .iter()
        .map(|&(_, d)| (d, if rng.gen_bool(0.2) { 0.0 } else { rng.gen_range(0.0..=p0) }))
        .collect();
    CrosstalkInput::new(p0, neighbors)
}

fn metric_properties(c: &mut Checks) {
    const CASES: usize = 10_000;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut fails = [0usize; 6];
    for _ in 0..CASES {
        let input = random_input(&mut rng);
        let base = crosstalk(&input).unwrap().value;

        let k = rng.gen_range(1e-3..1e3);
        let scaled = CrosstalkInput::new(
            k * input.p0,
            input.neighbors.iter().map(|&(d, p)| (d, k * p)).collect(),
        );
        if rel_err(crosstalk(&scaled).unwrap().value, base) > 1e-12 {
            fails[0] += 1;
        }

        let all_zero = input.neighbors.iter().all(|&(_, p)| p == 0.0);
        if !(0.0..=1.0).contains(&base) || (base == 0.0) != all_zero {
            fails[1] += 1;
        }

        let mut up = input.clone();
        let i = rng.gen_range(0..up.neighbors.len());
        up.neighbors[i].1 += rng.gen_range(0.0..1.0);
        if crosstalk(&up).unwrap().value < base {
            fails[2] += 1;
        }

        let mut p0_up = input.clone();
        p0_up.p0 += rng.gen_range(0.0..1.0);
        if crosstalk(&p0_up).unwrap().value > base {
            fails[3] += 1;
        }

        // one nonzero reading, moved from a side neighbour to a diagonal one
        let r = rng.gen_range(1e-6..=input.p0);
        let near: Vec<(f64, f64)> = input.neighbors.iter().map(|&(d, _)| (d, 0.0)).collect();
        let side = near.iter().position(|&(d, _)| d == 1.0).unwrap();
        let diag = near.iter().position(|&(d, _)| d > 1.0).unwrap();
        let mut a = CrosstalkInput::new(input.p0, near.clone());
        a.neighbors[side].1 = r;
        let mut b = CrosstalkInput::new(input.p0, near);
        b.neighbors[diag].1 = r;
        if !(crosstalk(&b).unwrap().value > crosstalk(&a).unwrap().value) {
            fails[4] += 1;
        }

        let u = rng.gen_range(0.0..=1.0);
        let uniform = CrosstalkInput::new(input.p0, input.neighbors.iter().map(|&(d, _)| (d, u * input.p0)).collect());
        if rel_err(crosstalk(&uniform).unwrap().value, u) > 1e-12 && u > 0.0 {
            fails[5] += 1;
        }
    }
    let names = ["scale invariance", "bounds", "monotone in neighbours", "antitone in p0", "distance weighting", "uniform ratio"];
    for (name, f) in names.iter().zip(fails) {
        c.check(f == 0, format!("{name}: {f} of {CASES} cases failed"));
    }
    c.note(format!("{} properties x {CASES} cases", names.len()));
}

// 3

fn census(c: &mut Checks) {
    for rows in 3..=20 {
        for cols in 3..=20 {
            let mut counts = [0usize; 3];
            for r in 0..rows {
                for col in 0..cols {
                    let h = neighborhood((r, col), rows, cols).unwrap();
                    let (slot, size) = match h.kind {
                        NeighborhoodKind::Corner => (0, 3),
                        NeighborhoodKind::Edge => (1, 5),
                        NeighborhoodKind::Center => (2, 8),
                        NeighborhoodKind::Custom => (usize::MAX, 0),
                    };
                    if slot == usize::MAX || h.len() != size {
                        c.check(false, format!("{rows}x{cols} ({r},{col}): {:?} with {}", h.kind, h.len()));
                        continue;
                    }
                    counts[slot] += 1;
                }
            }
            let want = [4, 2 * (rows - 2) + 2 * (cols - 2), (rows - 2) * (cols - 2)];
            c.check(counts == want, format!("{rows}x{cols}: {counts:?} != {want:?}"));
        }
    }
    let s2 = 2f64.sqrt();
    let corner = neighborhood((0, 0), 5, 5).unwrap();
    let mut m = corner.members.clone();
    m.sort_by(|a, b| a.0.cmp(&b.0));
    c.check(m == vec![((0, 1), 1.0), ((1, 0), 1.0), ((1, 1), s2)], format!("corner members {m:?}"));
    c.check(neighborhood((0, 2), 5, 5).unwrap().len() == 5, "edge of 5x5 has 5 members");
    c.check(neighborhood((2, 2), 5, 5).unwrap().len() == 8, "centre of 5x5 has 8 members");
    c.note("all grids 3..=20 x 3..=20");
}

// 4

/// Dense nodal analysis of the crossbar with an explicit ground node. Node
/// potentials are solved only in connected pieces that touch a node of
/// known potential; the rest float and carry no current.
fn kirchhoff_oracle(
    rows: usize,
    cols: usize,
    pixel_ohms: &[f64],
    lateral_ohms: Option<f64>,
    sel: (usize, usize),
    v_dd: f64,
    r_bias: f64,
    ground_unselected: bool,
) -> f64 {
    let row = |r: usize| r;
    let col = |k: usize| rows + k;
    let junction = |r: usize, k: usize| rows + cols + r * cols + k;
    let n = rows + cols + if lateral_ohms.is_some() { rows * cols } else { 0 };
    let ground = n;
    let total = n + 1;

    let mut edges: Vec<(usize, usize, f64)> = Vec::new();
    for r in 0..rows {
        for k in 0..cols {
            let ohms = pixel_ohms[r * cols + k];
            if !ohms.is_finite() {
                continue;
            }
            match lateral_ohms {
                None => edges.push((row(r), col(k), 1.0 / ohms)),
                Some(_) => {
                    edges.push((row(r), junction(r, k), 2.0 / ohms));
                    edges.push((junction(r, k), col(k), 2.0 / ohms));
                }
            }
        }
    }
    if let Some(l) = lateral_ohms {
        for r in 0..rows {
            for k in 0..cols {
                if k + 1 < cols {
                    edges.push((junction(r, k), junction(r, k + 1), 1.0 / l));
                }
                if r + 1 < rows {
                    edges.push((junction(r, k), junction(r + 1, k), 1.0 / l));
                }
            }
        }
    }
    edges.push((col(sel.1), ground, 1.0 / r_bias));

    let mut fixed: Vec<Option<f64>> = vec![None; total];
    fixed[ground] = Some(0.0);
    if ground_unselected {
        for r in 0..rows {
            fixed[row(r)] = Some(0.0);
        }
        for k in 0..cols {
            if k != sel.1 {
                fixed[col(k)] = Some(0.0);
            }
        }
    }
    fixed[row(sel.0)] = Some(v_dd);

    // pieces of free nodes joined by free-free edges
    let mut piece = vec![usize::MAX; total];
    let mut anchored = Vec::new();
    for start in 0..total {
        if fixed[start].is_some() || piece[start] != usize::MAX {
            continue;
        }
        let id = anchored.len();
        anchored.push(false);
        let mut queue = VecDeque::from([start]);
        piece[start] = id;
        while let Some(u) = queue.pop_front() {
            for &(a, b, _) in &edges {
                let other = if a == u { b } else if b == u { a } else { continue };
                if fixed[other].is_some() {
                    anchored[id] = true;
                } else if piece[other] == usize::MAX {
                    piece[other] = id;
                    queue.push_back(other);
                }
            }
        }
    }
    let unknown: Vec<usize> = (0..total).filter(|&u| fixed[u].is_none() && anchored[piece[u]]).collect();
    let Some(sense) = unknown.iter().position(|&u| u == col(sel.1)) else {
        return 0.0;
    };
    let mut index = vec![usize::MAX; total];
    for (i, &u) in unknown.iter().enumerate() {
        index[u] = i;
    }
    let m = unknown.len();
    let mut g = DMatrix::<f64>::zeros(m, m);
    let mut rhs = DVector::<f64>::zeros(m);
    for &(a, b, cond) in &edges {
        for (p, q) in [(a, b), (b, a)] {
            if index[p] == usize::MAX {
                continue;
            }
            g[(index[p], index[p])] += cond;
            match fixed[q] {
                Some(v) => rhs[index[p]] += cond * v,
                None if index[q] != usize::MAX => g[(index[p], index[q])] -= cond,
                None => {}
            }
        }
    }
    let v = g.lu().solve(&rhs).expect("anchored system is regular");
    v[sense]
}

fn random_ohms(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    (rng.gen_range(lo.ln()..hi.ln())).exp()
}

fn solver_oracle(c: &mut Checks) {
    const CASES: usize = 1000;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    let mut bad = 0;
    for case in 0..CASES {
        let rows = rng.gen_range(1..=3);
        let cols = rng.gen_range(1..=3);
        let pixels: Vec<f64> = (0..rows * cols)
            .map(|_| if rng.gen_bool(0.25) { f64::INFINITY } else { random_ohms(&mut rng, 100.0, 1e6) })
            .collect();
        let lateral = rng.gen_bool(0.4).then(|| random_ohms(&mut rng, 1e3, 1e7));
        let config = ReadoutConfig {
            v_dd: rng.gen_range(1.0..12.0),
            r_bias: random_ohms(&mut rng, 100.0, 1e5),
            ground_unselected: case % 5 == 0,
            ..ReadoutConfig::default()
        };
        let net = ResistorNetwork::from_resistances(rows, cols, &pixels, lateral);
        for r in 0..rows {
            for k in 0..cols {
                let got = read_pixel(&net, (r, k), &config).unwrap();
                let want = kirchhoff_oracle(rows, cols, &pixels, lateral, (r, k), config.v_dd, config.r_bias, config.ground_unselected);
                let e = rel_err(got, want);
                worst = worst.max(e);
                if e > 1e-9 {
                    bad += 1;
                }
            }
        }
    }
    c.check(bad == 0, format!("{bad} readings off by more than 1e-9"));
    c.note(format!("{CASES} networks, worst relative error {worst:.1e}"));

    // one conducting branch
    let mut worst_div: f64 = 0.0;
    for _ in 0..200 {
        let (rows, cols) = (rng.gen_range(1..=3), rng.gen_range(1..=3));
        let sel = (rng.gen_range(0..rows), rng.gen_range(0..cols));
        let ohms = random_ohms(&mut rng, 10.0, 1e6);
        let mut pixels = vec![f64::INFINITY; rows * cols];
        pixels[sel.0 * cols + sel.1] = ohms;
        let config = ReadoutConfig::default();
        let got = read_pixel(&ResistorNetwork::from_resistances(rows, cols, &pixels, None), sel, &config).unwrap();
        let want = config.v_dd * config.r_bias / (config.r_bias + ohms);
        worst_div = worst_div.max(rel_err(got, want));
    }
    c.check(worst_div <= 4.0 * f64::EPSILON, format!("divider limit off by {worst_div:.1e}"));
    c.note(format!("divider limit within {worst_div:.1e}"));
}

// 5

fn crosstalk_off(c: &mut Checks) {
    for geometry in [SensorGeometry::characterization_mat(4e-3).unwrap(), SensorGeometry::writing_pad()] {
        let mut sim = PadSimulator::new(geometry);
        sim.readout.mechanisms = Mechanisms::none();
        let targets: Vec<(usize, usize)> = if geometry.rows == 5 {
            (0..5).flat_map(|r| (0..5).map(move |k| (r, k))).collect()
        } else {
            vec![(0, 0), (7, 8), (15, 3)]
        };
        for s in targets {
            let (frame, cv) = simulate_point(&sim, s, 0.5, None).unwrap();
            let off_zero = (0..geometry.rows)
                .flat_map(|r| (0..geometry.cols).map(move |k| (r, k)))
                .filter(|&p| p != s)
                .all(|(r, k)| frame.get(r, k) == 0.0);
            c.check(frame.get(s.0, s.1) > 0.0, format!("{s:?} reads nothing"));
            c.check(off_zero, format!("{s:?}: off pixels not all zero"));
            c.check(cv.map(|v| v.value) == Ok(0.0), format!("{s:?}: C not exactly 0"));
        }
    }
    c.note("5x5 mat at every pixel and three pixels of the 16x16 pad read C = 0");
}

// 6

fn pitch_trend(c: &mut Checks) {
    let t = Instant::now();
    let mut sim = PadSimulator::new(SensorGeometry::new(3, 3, 0.05, 5e-3).unwrap());
    sim.diffusion_sigma = 15e-3;
    let pitches = [0.01, 0.02, 0.03, 0.04, 0.05];
    let reports = characterize(&sim, &[0.5], &pitches, true, None).unwrap();
    let dt = t.elapsed();
    let means: Vec<f64> = reports.iter().map(|r| r.summary.unwrap().mean).collect();
    c.check(means.windows(2).all(|w| w[1] < w[0]), format!("means {means:?}"));
    c.check(dt < Duration::from_secs(10), format!("took {dt:?}"));
    let shown: Vec<String> = means.iter().map(|m| format!("{m:.4}")).collect();
    c.note(format!("mean C at 1..5 cm: {} in {dt:.1?}", shown.join(" > ")));
}

// 7

fn random_frame(rng: &mut ChaCha8Rng) -> Frame {
    let (rows, cols) = (rng.gen_range(1..20), rng.gen_range(1..20));
    let scale = rng.gen_range(0.0..10.0);
    Frame::from_fn(rows, cols, Unit::Volts, |_, _| {
        if rng.gen_bool(0.3) {
            0.0
        } else {
            rng.gen_range(0.0..=scale)
        }
    })
}

fn pipeline_invariants(c: &mut Checks) {
    const CASES: usize = 2000;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut fails = [0usize; 5];
    for _ in 0..CASES {
        let f = random_frame(&mut rng);
        let sn = square_and_normalize(&f).unwrap();
        let v = f.values();
        let s = sn.values();
        let range_ok = s.iter().all(|x| (0.0..=1.0).contains(x)) && (f.max() == 0.0 || sn.max() == 1.0);
        let order_ok = (0..v.len()).all(|i| (0..v.len()).all(|j| !(v[i] < v[j]) || s[i] <= s[j]));
        if !(range_ok && order_ok) {
            fails[0] += 1;
        }

        let sigma = rng.gen_range(0.0..3.0);
        let radius = (3.0 * sigma as f64).ceil() as usize;
        let k = rng.gen_range(0.0..5.0);
        let constant = Frame::from_fn(f.rows(), f.cols(), Unit::Volts, |_, _| k);
        let fixed = gaussian_blur(&constant, sigma, radius).unwrap();
        if fixed.values().iter().any(|&x| (x - k).abs() > 1e-12 * k.max(1.0)) {
            fails[1] += 1;
        }
        let b = gaussian_blur(&f, sigma, radius).unwrap();
        if b.values().iter().any(|&x| x < 0.0 || x > f.max() * (1.0 + 1e-12)) {
            fails[2] += 1;
        }

        let t = adaptive_threshold(&b);
        let mean = b.values().iter().sum::<f64>() / b.values().len() as f64;
        if !t.values().iter().zip(b.values()).all(|(&o, &x)| o == if x > mean { 1.0 } else { 0.0 }) {
            fails[3] += 1;
        }

        let frames: Vec<Frame> = (0..3).map(|_| f.clone()).collect();
        let cfg = PipelineConfig { frames_per_capture: 3, blur_sigma: sigma, ..PipelineConfig::default() };
        if run_pipeline(&frames, &cfg).unwrap() != run_pipeline(&frames, &cfg).unwrap() {
            fails[4] += 1;
        }
    }
    let names = ["S&N range and order", "blur constant fixpoint", "blur bounds", "threshold partition", "determinism"];
    for (name, f) in names.iter().zip(fails) {
        c.check(f == 0, format!("{name}: {f} of {CASES} cases failed"));
    }

    // suppression on simulated single-pixel stimuli
    const STIMULI: usize = 1000;
    let mut worse = 0;
    let mut undefined = 0;
    for i in 0..STIMULI {
        let pitch = rng.gen_range(3e-3..5e-3);
        let mut sim = PadSimulator::new(SensorGeometry::characterization_mat(pitch).unwrap());
        sim.readout.mechanisms = Mechanisms {
            sheet_paths: rng.gen_bool(0.7),
            finite_off: rng.gen_bool(0.7),
            diffusion: rng.gen_bool(0.7),
        };
        sim.readout.frames_per_capture = 10;
        let s = (rng.gen_range(0..5), rng.gen_range(0..5));
        let mass = rng.gen_range(0.1..2.0);
        let (field, _) = sim.field(&[], &[WeightStimulus::new(s.0, s.1, mass)]).unwrap();
        let frames = sim.capture_static(&field, Some(i as u64)).unwrap();
        let staged = run_pipeline(&frames, &PipelineConfig { frames_per_capture: 10, ..PipelineConfig::default() }).unwrap();
        match (crosstalk_frame(&staged.raw, s), crosstalk_frame(&staged.squared_normalized, s)) {
            (Ok(raw), Ok(sn)) => {
                if sn.value > raw.value {
                    worse += 1;
                }
            }
            _ => undefined += 1,
        }
    }
    c.check(worse == 0, format!("S&N raised crosstalk for {worse} of {STIMULI} stimuli"));
    c.check(undefined == 0, format!("{undefined} stimuli had an undefined metric"));
    c.note(format!("{} property groups x {CASES}, {STIMULI} simulated stimuli", names.len()));
}

// 8

fn worst_of<T>(runs: usize, mut f: impl FnMut() -> T) -> Duration {
    f();
    (0..runs)
        .map(|_| {
            let t = Instant::now();
            std::hint::black_box(f());
            t.elapsed()
        })
        .max()
        .unwrap()
}

fn performance(c: &mut Checks) {
    let mut sim = PadSimulator::default();
    let strokes = velopad::stimulus::strokes_along(&[(0.01, 0.01), (0.01, 0.04), (0.03, 0.04)], 1e-3, 2.0, 0.0, 1.0);
    let (field, _) = sim.field(&strokes, &[]).unwrap();
    let frames = sim.capture_static(&field, Some(1)).unwrap();
    let cfg = PipelineConfig::default();
    let pipeline = worst_of(5, || run_pipeline(&frames, &cfg).unwrap());
    sim.readout.mechanisms = Mechanisms::all();
    let scan = worst_of(3, || sim.scan(&field).unwrap());
    c.check(pipeline < Duration::from_millis(10), format!("pipeline took {pipeline:?}"));
    c.check(scan < Duration::from_secs(1), format!("scan took {scan:?}"));
    c.note(format!("pipeline {pipeline:.2?}, 16x16 scan {scan:.2?} (worst of repeated runs)"));
}

// 9

fn wire(c: &mut Checks) {
    const CASES: usize = 10_000;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut bad = 0;
    let mut dims: Vec<(usize, usize)> = (0..CASES).map(|_| (rng.gen_range(1..=40), rng.gen_range(1..=40))).collect();
    dims[..4].copy_from_slice(&[(255, 255), (255, 1), (1, 255), (1, 1)]);
    for (rows, cols) in dims {
        let values: Vec<f64> = (0..rows * cols).map(|_| rng.gen::<u16>() as f64).collect();
        let f = Frame::from_vec(rows, cols, values, Unit::AdcCounts).unwrap();
        let seq: u16 = rng.gen();
        let bytes = encode_wire(&f, seq).unwrap();
        let (got, diag) = decode_stream(&bytes, None);
        if !(diag.is_clean() && got.len() == 1 && got[0].seq == seq && got[0].to_frame() == f && bytes.len() == frame_len(rows, cols)) {
            bad += 1;
        }
    }
    c.check(bad == 0, format!("{bad} of {CASES} round trips failed"));

    let counts = |k: u16| Frame::from_fn(16, 16, Unit::AdcCounts, |r, col| ((r * 16 + col) as u16 ^ k) as f64);
    let frames: Vec<Vec<u8>> = (0..3).map(|k| encode_wire(&counts(k), k).unwrap()).collect();
    c.check(frames[0].len() == 521, format!("16x16 frame is {} bytes", frames[0].len()));

    let mut stream = frames.concat();
    stream[521 + 7 + 100] ^= 0x01;
    let (got, diag) = decode_stream(&stream, Some((16, 16)));
    let seqs: Vec<u16> = got.iter().map(|w| w.seq).collect();
    c.check(seqs == vec![0, 2] && diag.crc_failures == 1, format!("flipped byte: {seqs:?} {diag:?}"));

    let mut prefix_fail = 0;
    for j in 1..521 {
        let mut s: Vec<u8> = (0..j).map(|_| rng.gen()).collect();
        s.extend(frames.concat());
        let (got, diag) = decode_stream(&s, None);
        if got.len() != 3 || diag.resyncs < 1 {
            prefix_fail += 1;
        }
    }
    c.check(prefix_fail == 0, format!("{prefix_fail} garbage prefixes lost frames"));

    let one = encode_wire(&Frame::from_vec(1, 1, vec![0x0123 as f64], Unit::AdcCounts).unwrap(), 0).unwrap();
    c.check(one == [0xA5, 0x5A, 0x01, 0x00, 0x00, 0x01, 0x01, 0x23, 0x01, 0xBF, 0x4B], format!("1x1 frame {one:02X?}"));
    c.note(format!("{CASES} round trips, 520 garbage prefixes"));
}

// 10

struct Legibility {
    overlap: f64,
    components: usize,
    on: usize,
    mask: usize,
}

fn legibility(fixture_name: &str) -> Legibility {
    let text = std::fs::read_to_string(fixture(fixture_name)).unwrap();
    let stimulus: Stimulus = serde_json::from_str(&text).unwrap();
    let config = SessionConfig::default()
        .apply(&ConfigPatch { seed: Some(7), ..Default::default() })
        .unwrap();
    let run = config.simulate(&stimulus).unwrap();
    assert!(run.rejected.is_empty());
    let g = config.simulator.geometry;
    let mut mask = vec![false; g.rows * g.cols];
    for e in &stimulus.strokes {
        let r = ((e.y - g.line_width / 2.0) / g.pitch).round() as usize;
        let k = ((e.x - g.line_width / 2.0) / g.pitch).round() as usize;
        mask[r * g.cols + k] = true;
    }
    let on: Vec<bool> = run.staged.binary.values().iter().map(|&v| v == 1.0).collect();
    let hit = mask.iter().zip(&on).filter(|(m, o)| **m && **o).count();
    let total = mask.iter().filter(|m| **m).count();
    Legibility {
        overlap: hit as f64 / total as f64,
        components: components8(&on, g.rows, g.cols),
        on: on.iter().filter(|o| **o).count(),
        mask: total,
    }
}

fn components8(on: &[bool], rows: usize, cols: usize) -> usize {
    let mut seen = vec![false; on.len()];
    let mut count = 0;
    for start in 0..on.len() {
        if !on[start] || seen[start] {
            continue;
        }
        count += 1;
        seen[start] = true;
        let mut stack = vec![start];
        while let Some(i) = stack.pop() {
            let (r, k) = ((i / cols) as isize, (i % cols) as isize);
            for dr in -1..=1 {
                for dk in -1..=1 {
                    let (nr, nk) = (r + dr, k + dk);
                    if nr < 0 || nk < 0 || nr >= rows as isize || nk >= cols as isize {
                        continue;
                    }
                    let j = nr as usize * cols + nk as usize;
                    if on[j] && !seen[j] {
                        seen[j] = true;
                        stack.push(j);
                    }
                }
            }
        }
    }
    count
}

fn stroke_legibility(c: &mut Checks) {
    let big = legibility("stroke_l_4cm.json");
    c.check(big.overlap >= 0.8, format!("4 cm overlap {:.2}", big.overlap));
    c.check(big.components == 1, format!("4 cm binary has {} components", big.components));
    let small = legibility("stroke_l_1cm.json");
    c.note(format!(
        "4 cm: overlap {:.0}%, {} component, {} pixels on for {} traced; 1 cm (informational): overlap {:.0}%, {} pixels on for {} traced",
        100.0 * big.overlap,
        big.components,
        big.on,
        big.mask,
        100.0 * small.overlap,
        small.on,
        small.mask
    ));
}

fn main() {
    let criteria: [(&str, fn(&mut Checks)); 10] = [
        ("worked crosstalk example", worked_example),
        ("metric property suite", metric_properties),
        ("neighbourhood census", census),
        ("nodal solver against dense Kirchhoff oracle", solver_oracle),
        ("crosstalk with every mechanism off", crosstalk_off),
        ("crosstalk falls with pitch", pitch_trend),
        ("pipeline invariants and S&N suppression", pipeline_invariants),
        ("desk-scale performance", performance),
        ("wire protocol", wire),
        ("stroke legibility", stroke_legibility),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let mut checks = Checks::default();
        let outcome = std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| run(&mut checks)));
        if let Err(e) = outcome {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            checks.failures.push(format!("panicked: {msg}"));
        }
        let pass = checks.failures.is_empty();
        if !pass {
            failed += 1;
        }
        let detail = if pass { checks.notes.join("; ") } else { checks.failures.join("; ") };
        println!(
            "criterion {:>2} {} {name} [{:.2?}] {detail}",
            i + 1,
            if pass { "PASS" } else { "FAIL" },
            t.elapsed()
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
