use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::frame::{Frame, Unit};
use crate::geometry::SensorGeometry;
use crate::stimulus::PressureField;

use super::network::{build_network, NodeId, ResistorNetwork};
use super::solver::EnvelopeCholesky;
use super::{ReadoutConfig, VelostatModel};

/// Stamps a conductance between two solved nodes, or between a solved node
/// and a node held at `fixed` volts.
struct Stamper {
    entries: Vec<(usize, usize, f64)>,
    rhs: Vec<f64>,
}

impl Stamper {
    fn new(n: usize) -> Self {
        Self {
            entries: Vec::new(),
            rhs: vec![0.0; n],
        }
    }

    fn between(&mut self, a: usize, b: usize, g: f64) {
        self.entries.push((a, a, g));
        self.entries.push((b, b, g));
        self.entries.push((a.max(b), a.min(b), -g));
    }

    fn to_fixed(&mut self, a: usize, g: f64, volts: f64) {
        self.entries.push((a, a, g));
        self.rhs[a] += g * volts;
    }
}

fn adjacency(n: usize, branches: &[(NodeId, NodeId, f64)]) -> Vec<Vec<(NodeId, f64)>> {
    let mut adj = vec![Vec::new(); n];
    for &(a, b, g) in branches {
        adj[a].push((b, g));
        adj[b].push((a, g));
    }
    adj
}

/// Reads one crossover: drive row `row` at `v_dd`, return column `col` to
/// ground through `r_bias`, and solve the nodal equations for every other
/// node. Returns the voltage across `r_bias`; 0 V when no conducting path
/// joins the two electrodes.
pub fn read_pixel(network: &ResistorNetwork, selected: (usize, usize), config: &ReadoutConfig) -> Result<f64> {
    config.validate()?;
    let (row, col) = selected;
    if row >= network.rows() || col >= network.cols() {
        return Err(Error::OutOfBounds {
            row,
            col,
            rows: network.rows(),
            cols: network.cols(),
        });
    }
    let n = network.node_count();
    let drive = network.row_node(row);
    let sense = network.col_node(col);

    let mut fixed: Vec<Option<f64>> = vec![None; n];
    if config.ground_unselected {
        for r in 0..network.rows() {
            fixed[network.row_node(r)] = Some(0.0);
        }
        for c in 0..network.cols() {
            if c != col {
                fixed[network.col_node(c)] = Some(0.0);
            }
        }
    }
    fixed[drive] = Some(config.v_dd);

    let branches = network.branches();
    let adj = adjacency(n, &branches);

    // Nodes whose potential is set by the drive: reachable from it without
    // crossing a node held at a fixed voltage.
    let mut reached = vec![false; n];
    reached[drive] = true;
    let mut stack = vec![drive];
    while let Some(u) = stack.pop() {
        if u != drive && fixed[u].is_some() {
            continue;
        }
        for &(v, _) in &adj[u] {
            if !reached[v] {
                reached[v] = true;
                stack.push(v);
            }
        }
    }
    if !reached[sense] {
        return Ok(0.0);
    }

    let mut unknowns: Vec<NodeId> = (0..n).filter(|&u| reached[u] && fixed[u].is_none()).collect();
    unknowns.sort_by_key(|&u| network.order_key(u));
    let mut index = vec![usize::MAX; n];
    for (i, &u) in unknowns.iter().enumerate() {
        index[u] = i;
    }

    let mut st = Stamper::new(unknowns.len());
    for &(a, b, g) in &branches {
        match (index[a] != usize::MAX, index[b] != usize::MAX) {
            (true, true) => st.between(index[a], index[b], g),
            (true, false) => st.to_fixed(index[a], g, fixed[b].unwrap_or(0.0)),
            (false, true) => st.to_fixed(index[b], g, fixed[a].unwrap_or(0.0)),
            (false, false) => {}
        }
    }
    st.to_fixed(index[sense], 1.0 / config.r_bias, 0.0);

    let chol = EnvelopeCholesky::factor(unknowns.len(), &st.entries)
        .map_err(|e| Error::InvalidConfig(format!("nodal matrix: {e}")))?;
    let v = chol.solve(&st.rhs);
    Ok(v[index[sense]].clamp(0.0, config.v_dd))
}

/// Scans every crossover by repeated [`read_pixel`] calls.
pub fn scan_frame_per_selection(network: &ResistorNetwork, config: &ReadoutConfig) -> Result<Frame> {
    let (rows, cols) = (network.rows(), network.cols());
    let mut values = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        for c in 0..cols {
            values.push(read_pixel(network, (r, c), config)?);
        }
    }
    Ok(Frame::new_unchecked(rows, cols, values, Unit::Volts))
}

/// Union-find root with path halving.
fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Scan with floating unselected electrodes.
///
/// With every other electrode floating, the network seen from the driven
/// row and the sensed column is a two-terminal resistor `R_eff`, so the
/// reading is the divider `v_dd * r_bias / (r_bias + R_eff)`. One grounded
/// Laplacian factorization per connected component gives every `R_eff`.
fn scan_floating(network: &ResistorNetwork, config: &ReadoutConfig) -> Result<Frame> {
    let (rows, cols) = (network.rows(), network.cols());
    let n = network.node_count();
    let branches = network.branches();

    let mut parent: Vec<usize> = (0..n).collect();
    for &(a, b, _) in &branches {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent[ra] = rb;
        }
    }
    let comp: Vec<usize> = (0..n).map(|u| find(&mut parent, u)).collect();

    // Diagonal and cross terms of the grounded Laplacian inverse for
    // electrode nodes; the reference node of each component has K = 0.
    let electrodes = rows + cols;
    let mut k = vec![0.0; electrodes * electrodes];
    let mut roots: Vec<usize> = (0..electrodes).map(|e| comp[e]).collect();
    roots.sort_unstable();
    roots.dedup();
    for root in roots {
        let mut nodes: Vec<NodeId> = (0..n).filter(|&u| comp[u] == root).collect();
        let has_row = nodes.iter().any(|&u| u < rows);
        let has_col = nodes.iter().any(|&u| u >= rows && u < electrodes);
        if !(has_row && has_col) {
            continue;
        }
        nodes.sort_by_key(|&u| network.order_key(u));
        let reference = nodes.pop().expect("component has nodes");
        let mut index = vec![usize::MAX; n];
        for (i, &u) in nodes.iter().enumerate() {
            index[u] = i;
        }
        let mut st = Stamper::new(nodes.len());
        for &(a, b, g) in &branches {
            if comp[a] != root {
                continue;
            }
            match (a == reference, b == reference) {
                (false, false) => st.between(index[a], index[b], g),
                (false, true) => st.to_fixed(index[a], g, 0.0),
                (true, false) => st.to_fixed(index[b], g, 0.0),
                (true, true) => {}
            }
        }
        let chol = EnvelopeCholesky::factor(nodes.len(), &st.entries)
            .map_err(|e| Error::InvalidConfig(format!("nodal matrix: {e}")))?;
        let members: Vec<NodeId> = (0..electrodes)
            .filter(|&e| comp[e] == root && e != reference)
            .collect();
        let mut rhs = vec![0.0; nodes.len()];
        for &a in &members {
            rhs.iter_mut().for_each(|x| *x = 0.0);
            rhs[index[a]] = 1.0;
            chol.solve_in_place(&mut rhs);
            for &b in &members {
                k[a * electrodes + b] = rhs[index[b]];
            }
        }
    }

    let mut values = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        for c in 0..cols {
            let (a, b) = (r, rows + c);
            let v = if comp[a] != comp[b] {
                0.0
            } else {
                let r_eff =
                    (k[a * electrodes + a] + k[b * electrodes + b] - 2.0 * k[a * electrodes + b]).max(0.0);
                config.v_dd * config.r_bias / (config.r_bias + r_eff)
            };
            values.push(v.clamp(0.0, config.v_dd));
        }
    }
    Ok(Frame::new_unchecked(rows, cols, values, Unit::Volts))
}

/// Adds seeded Gaussian noise of `config.noise_std` volts to every reading
/// and clamps to `[0, v_dd]`. Each pixel draws from its own ChaCha stream
/// position, so the result does not depend on evaluation order.
pub fn add_measurement_noise(frame: &mut Frame, config: &ReadoutConfig, seed: u64, frame_index: u64) {
    if config.noise_std == 0.0 {
        return;
    }
    let (rows, cols) = frame.dims();
    for r in 0..rows {
        for c in 0..cols {
            let pixel = (r * cols + c) as u128;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(frame_index);
            rng.set_word_pos(pixel * 256);
            let z: f64 = StandardNormal.sample(&mut rng);
            let v = (frame.get(r, c) + config.noise_std * z).clamp(0.0, config.v_dd);
            frame.set(r, c, v);
        }
    }
}

/// Raster-scans the whole crossbar for one pressure field. With
/// `noise_seed` set, measurement noise is added as frame 0 of that seed.
pub fn scan_frame(
    geometry: &SensorGeometry,
    field: &PressureField,
    model: &VelostatModel,
    config: &ReadoutConfig,
    noise_seed: Option<u64>,
) -> Result<Frame> {
    config.validate()?;
    let network = build_network(geometry, field, model, &config.mechanisms)?;
    let mut frame = if config.ground_unselected {
        scan_frame_per_selection(&network, config)?
    } else {
        scan_floating(&network, config)?
    };
    if let Some(seed) = noise_seed {
        add_measurement_noise(&mut frame, config, seed, 0);
    }
    Ok(frame)
}

/// `counts = floor(clamp(v, 0, v_dd) / v_dd * (2^bits - 1) + 0.5)`.
pub fn adc_quantize(frame: &Frame, config: &ReadoutConfig) -> Result<Frame> {
    config.validate()?;
    if frame.unit() != Unit::Volts {
        return Err(Error::UnitMismatch {
            expected: Unit::Volts,
            got: frame.unit(),
        });
    }
    let full = config.adc_full_scale() as f64;
    let values = frame
        .values()
        .iter()
        .map(|v| (v.clamp(0.0, config.v_dd) / config.v_dd * full + 0.5).floor())
        .collect();
    Ok(Frame::new_unchecked(frame.rows(), frame.cols(), values, Unit::AdcCounts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::Mechanisms;

    fn cfg() -> ReadoutConfig {
        ReadoutConfig {
            noise_std: 0.0,
            ..ReadoutConfig::default()
        }
    }

    #[test]
    fn single_pixel_divider() {
        let c = cfg();
        let net = ResistorNetwork::from_resistances(1, 1, &[c.r_bias], None);
        let v = read_pixel(&net, (0, 0), &c).unwrap();
        assert!((v - c.v_dd / 2.0).abs() < 1e-12);
        let net = ResistorNetwork::from_resistances(1, 1, &[f64::INFINITY], None);
        assert_eq!(read_pixel(&net, (0, 0), &c).unwrap(), 0.0);
    }

    #[test]
    fn two_by_two_bridge_closed_form() {
        // R00 in parallel with the sneak path R01 + R11 + R10.
        let c = cfg();
        let r = [1500.0, 2200.0, 3300.0, 4700.0];
        let net = ResistorNetwork::from_resistances(2, 2, &r, None);
        let sneak = r[1] + r[3] + r[2];
        let par = r[0] * sneak / (r[0] + sneak);
        let want = c.v_dd * c.r_bias / (c.r_bias + par);
        let got = read_pixel(&net, (0, 0), &c).unwrap();
        assert!((got - want).abs() / want < 1e-12);
        let fast = scan_floating(&net, &c).unwrap();
        assert!((fast.get(0, 0) - want).abs() / want < 1e-12);
    }

    #[test]
    fn sneak_path_through_three_pixels() {
        let g = SensorGeometry::new(2, 2, 3e-3, 0.254e-3).unwrap();
        let field = PressureField::from_vec(2, 2, vec![5.0, 0.0, 0.0, 0.0]).unwrap();
        let mut c = cfg();
        c.mechanisms = Mechanisms {
            finite_off: true,
            ..Mechanisms::none()
        };
        let f = scan_frame(&g, &field, &VelostatModel::default(), &c, None).unwrap();
        assert!(f.get(1, 1) > 0.0);
        assert!(f.get(0, 0) > f.get(1, 1));
    }

    #[test]
    fn grounded_lines_block_sneak_paths() {
        let c = ReadoutConfig {
            ground_unselected: true,
            mechanisms: Mechanisms {
                finite_off: true,
                ..Mechanisms::none()
            },
            ..cfg()
        };
        let r = [1000.0, 1000.0, 1000.0, 1e9];
        let net = ResistorNetwork::from_resistances(2, 2, &r, None);
        // Column 0 sees R00 from the drive, R10 to the grounded row and r_bias.
        let v = read_pixel(&net, (0, 0), &c).unwrap();
        assert!((v - c.v_dd / 3.0).abs() < 1e-12);
        let g = SensorGeometry::new(2, 2, 3e-3, 0.254e-3).unwrap();
        let field = PressureField::from_vec(2, 2, vec![5.0, 0.0, 0.0, 0.0]).unwrap();
        let f = scan_frame(&g, &field, &VelostatModel::default(), &c, None).unwrap();
        // Pixel (1,1) only sees its own r_off against r_bias and the grounded row 0.
        let g_off = 1.0 / VelostatModel::default().r_off;
        let want = c.v_dd * g_off / (2.0 * g_off + 1.0 / c.r_bias);
        assert!((f.get(1, 1) - want).abs() / want < 1e-12);
    }

    #[test]
    fn zero_field_ideal_pixels_reads_zero() {
        let g = SensorGeometry::writing_pad();
        let c = ReadoutConfig {
            mechanisms: Mechanisms::none(),
            ..cfg()
        };
        let f = scan_frame(&g, &PressureField::for_geometry(&g), &VelostatModel::default(), &c, None).unwrap();
        assert!(f.values().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn isolated_pixel_without_mechanisms() {
        let g = SensorGeometry::characterization_mat(4e-3).unwrap();
        let mut field = PressureField::for_geometry(&g);
        field.add(2, 2, 4.9);
        let c = ReadoutConfig {
            mechanisms: Mechanisms::none(),
            ..cfg()
        };
        let f = scan_frame(&g, &field, &VelostatModel::default(), &c, None).unwrap();
        for r in 0..5 {
            for col in 0..5 {
                assert_eq!(f.get(r, col) > 0.0, (r, col) == (2, 2));
            }
        }
    }

    #[test]
    fn fast_scan_matches_per_selection() {
        let g = SensorGeometry::characterization_mat(3e-3).unwrap();
        let mut field = PressureField::for_geometry(&g);
        field.add(1, 3, 2.0);
        field.add(4, 0, 0.7);
        field.add(2, 2, 5.0);
        let c = cfg();
        let net = build_network(&g, &field, &VelostatModel::default(), &c.mechanisms).unwrap();
        let a = scan_floating(&net, &c).unwrap();
        let b = scan_frame_per_selection(&net, &c).unwrap();
        for (x, y) in a.values().iter().zip(b.values()) {
            assert!((x - y).abs() <= 1e-9 * y.abs().max(1e-12), "{x} vs {y}");
        }
    }

    #[test]
    fn noise_is_deterministic_per_seed() {
        let g = SensorGeometry::characterization_mat(4e-3).unwrap();
        let mut field = PressureField::for_geometry(&g);
        field.add(2, 2, 4.9);
        let c = ReadoutConfig::default();
        let m = VelostatModel::default();
        let a = scan_frame(&g, &field, &m, &c, Some(7)).unwrap();
        let b = scan_frame(&g, &field, &m, &c, Some(7)).unwrap();
        let d = scan_frame(&g, &field, &m, &c, Some(8)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, d);
    }

    #[test]
    fn adc_rounding() {
        let c = cfg();
        let f = Frame::from_vec(1, 3, vec![0.0, c.v_dd, c.v_dd / 2.0], Unit::Volts).unwrap();
        let q = adc_quantize(&f, &c).unwrap();
        assert_eq!(q.values(), &[0.0, 1023.0, 512.0]);
        assert_eq!(q.unit(), Unit::AdcCounts);
        let over = Frame::from_vec(1, 2, vec![-1.0, 9.0], Unit::Volts).unwrap();
        assert_eq!(adc_quantize(&over, &c).unwrap().values(), &[0.0, 1023.0]);
        assert!(adc_quantize(&q, &c).is_err());
    }
}
