use crate::error::Result;
use crate::geometry::SensorGeometry;
use crate::stimulus::PressureField;

use super::{Mechanisms, VelostatModel};

pub type NodeId = usize;

/// The velostat crossover between row `row` and column `col`.
///
/// With sheet paths enabled the crossover is split at a junction node in
/// the middle of the sheet: half of the pixel resistance on each side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PixelBranch {
    pub row: usize,
    pub col: usize,
    /// Zero for an open (ideal, unpressed) pixel.
    pub conductance: f64,
    pub junction: Option<NodeId>,
}

/// Lateral conduction through the sheet between two junction nodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lateral {
    pub a: NodeId,
    pub b: NodeId,
    pub conductance: f64,
}

/// Resistor network of one crossbar state.
///
/// Node numbering: row electrodes `0..rows`, column electrodes
/// `rows..rows + cols`, then one junction per crossover in row-major order
/// when sheet paths are enabled.
#[derive(Debug, Clone, PartialEq)]
pub struct ResistorNetwork {
    rows: usize,
    cols: usize,
    node_count: usize,
    pixels: Vec<PixelBranch>,
    laterals: Vec<Lateral>,
}

impl ResistorNetwork {
    /// A network from explicit pixel resistances (row-major, `f64::INFINITY`
    /// for open) and an optional lateral resistance between neighbouring
    /// junctions.
    pub fn from_resistances(rows: usize, cols: usize, pixel_ohms: &[f64], lateral_ohms: Option<f64>) -> Self {
        assert_eq!(pixel_ohms.len(), rows * cols);
        let mut net = Self {
            rows,
            cols,
            node_count: rows + cols,
            pixels: Vec::with_capacity(rows * cols),
            laterals: Vec::new(),
        };
        let sheet = lateral_ohms.is_some();
        if sheet {
            net.node_count += rows * cols;
        }
        for r in 0..rows {
            for c in 0..cols {
                let ohms = pixel_ohms[r * cols + c];
                net.pixels.push(PixelBranch {
                    row: r,
                    col: c,
                    conductance: if ohms.is_finite() { 1.0 / ohms } else { 0.0 },
                    junction: sheet.then(|| net.junction_index(r, c)),
                });
            }
        }
        if let Some(ohms) = lateral_ohms {
            let g = if ohms.is_finite() { 1.0 / ohms } else { 0.0 };
            for r in 0..rows {
                for c in 0..cols {
                    let here = net.junction_index(r, c);
                    if c + 1 < cols {
                        net.laterals.push(Lateral {
                            a: here,
                            b: net.junction_index(r, c + 1),
                            conductance: g,
                        });
                    }
                    if r + 1 < rows {
                        net.laterals.push(Lateral {
                            a: here,
                            b: net.junction_index(r + 1, c),
                            conductance: g,
                        });
                    }
                }
            }
        }
        net
    }

    fn junction_index(&self, row: usize, col: usize) -> NodeId {
        self.rows + self.cols + row * self.cols + col
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn pixels(&self) -> &[PixelBranch] {
        &self.pixels
    }

    pub fn laterals(&self) -> &[Lateral] {
        &self.laterals
    }

    pub fn has_junctions(&self) -> bool {
        !self.laterals.is_empty() || self.pixels.iter().any(|p| p.junction.is_some())
    }

    pub fn conducting_pixel_count(&self) -> usize {
        self.pixels.iter().filter(|p| p.conductance > 0.0).count()
    }

    pub fn row_node(&self, row: usize) -> NodeId {
        row
    }

    pub fn col_node(&self, col: usize) -> NodeId {
        self.rows + col
    }

    /// Two-terminal conductances after expanding split pixels; open branches
    /// are skipped.
    pub fn branches(&self) -> Vec<(NodeId, NodeId, f64)> {
        let mut out = Vec::with_capacity(2 * self.pixels.len() + self.laterals.len());
        for p in &self.pixels {
            if p.conductance <= 0.0 {
                continue;
            }
            let (rn, cn) = (self.row_node(p.row), self.col_node(p.col));
            match p.junction {
                Some(j) => {
                    out.push((rn, j, 2.0 * p.conductance));
                    out.push((j, cn, 2.0 * p.conductance));
                }
                None => out.push((rn, cn, p.conductance)),
            }
        }
        for l in &self.laterals {
            if l.conductance > 0.0 {
                out.push((l.a, l.b, l.conductance));
            }
        }
        out
    }

    /// Elimination order key: each junction row followed by its row
    /// electrode, column electrodes last.
    pub(crate) fn order_key(&self, node: NodeId) -> usize {
        let (r, c) = (self.rows, self.cols);
        if node < r {
            node * (c + 1) + c
        } else if node < r + c {
            r * (c + 1) + (node - r)
        } else {
            let k = node - r - c;
            (k / c) * (c + 1) + k % c
        }
    }
}

/// Builds the crossbar network for a pressure field.
pub fn build_network(
    geometry: &SensorGeometry,
    field: &PressureField,
    model: &VelostatModel,
    mechanisms: &Mechanisms,
) -> Result<ResistorNetwork> {
    geometry.validate()?;
    model.validate()?;
    field.check_matches(geometry)?;
    let (rows, cols) = (geometry.rows, geometry.cols);
    let mut ohms = Vec::with_capacity(rows * cols);
    for &p in field.values() {
        let g = model.conductance(p, mechanisms.finite_off)?;
        ohms.push(if g > 0.0 { 1.0 / g } else { f64::INFINITY });
    }
    let lateral = mechanisms
        .sheet_paths
        .then(|| model.lateral_resistance(geometry.pitch, geometry.line_width));
    Ok(ResistorNetwork::from_resistances(rows, cols, &ohms, lateral))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_by_two_counts() {
        let g = SensorGeometry::new(2, 2, 3e-3, 0.254e-3).unwrap();
        let f = PressureField::from_vec(2, 2, vec![1.0; 4]).unwrap();
        let m = Mechanisms {
            sheet_paths: false,
            ..Mechanisms::all()
        };
        let net = build_network(&g, &f, &VelostatModel::default(), &m).unwrap();
        assert_eq!(net.node_count(), 4);
        assert_eq!(net.pixels().len(), 4);
        assert_eq!(net.branches().len(), 4);
    }

    #[test]
    fn unpressed_ideal_pixels_do_not_conduct() {
        let g = SensorGeometry::new(3, 3, 3e-3, 0.254e-3).unwrap();
        let f = PressureField::zeros(3, 3);
        let net = build_network(&g, &f, &VelostatModel::default(), &Mechanisms::none()).unwrap();
        assert_eq!(net.conducting_pixel_count(), 0);
        assert!(net.branches().is_empty());
    }

    #[test]
    fn five_by_five_with_sheet() {
        let g = SensorGeometry::characterization_mat(4e-3).unwrap();
        let f = PressureField::zeros(5, 5);
        let net = build_network(&g, &f, &VelostatModel::default(), &Mechanisms::all()).unwrap();
        assert_eq!(net.pixels().len(), 25);
        assert_eq!(net.laterals().len(), 40);
        assert_eq!(net.node_count(), 5 + 5 + 25);
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let g = SensorGeometry::characterization_mat(4e-3).unwrap();
        let f = PressureField::zeros(4, 5);
        assert!(build_network(&g, &f, &VelostatModel::default(), &Mechanisms::all()).is_err());
    }

    #[test]
    fn lateral_grows_with_pitch() {
        let m = VelostatModel::default();
        assert!(m.lateral_resistance(5e-3, 0.254e-3) > m.lateral_resistance(3e-3, 0.254e-3));
    }

    #[test]
    fn order_keys_are_a_permutation() {
        let net = ResistorNetwork::from_resistances(3, 4, &[1.0; 12], Some(1.0));
        let mut keys: Vec<usize> = (0..net.node_count()).map(|n| net.order_key(n)).collect();
        keys.sort();
        keys.dedup();
        assert_eq!(keys.len(), net.node_count());
        let net = ResistorNetwork::from_resistances(3, 4, &[1.0; 12], None);
        let mut keys: Vec<usize> = (0..net.node_count()).map(|n| net.order_key(n)).collect();
        keys.sort();
        keys.dedup();
        assert_eq!(keys.len(), 7);
    }
}
