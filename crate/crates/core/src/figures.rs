//! Vendored TikZ bodies of the bundled figures, with their expected counts.

/// Expected counts and degrees for one figure.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Figure {
    pub id: &'static str,
    pub tikz: &'static str,
    pub vertices: usize,
    pub edges: usize,
    /// Degrees allowed to occur (for patches: allowed interior degrees).
    pub degrees: &'static [usize],
    /// Exact number of vertices of the highest allowed degree, when stated
    /// or forced by the handshake lemma.
    pub high_degree_count: Option<usize>,
    /// Finite piece of an infinite graph; low-degree vertices are boundary.
    pub patch: bool,
    /// Stated rigidity, if any.
    pub rigid: Option<bool>,
}

impl Figure {
    pub fn profile(&self) -> (usize, usize) {
        let lo = *self.degrees.first().expect("non-empty degree set");
        let hi = *self.degrees.last().expect("non-empty degree set");
        (lo, hi)
    }
}

macro_rules! fig {
    ($id:literal, $v:expr, $e:expr, $deg:expr, $high:expr, $patch:expr, $rigid:expr) => {
        Figure {
            id: $id,
            tikz: include_str!(concat!("../../../assets/figures/", $id, ".tex")),
            vertices: $v,
            edges: $e,
            degrees: $deg,
            high_degree_count: $high,
            patch: $patch,
            rigid: $rigid,
        }
    };
}

const R: Option<bool> = Some(true);
const F: Option<bool> = Some(false);

pub static FIGURES: &[Figure] = &[
    fig!("fig01a_kite", 12, 21, &[2, 4], None, false, R),
    fig!("fig01b_double_kite", 22, 42, &[2, 4], Some(20), false, R),
    fig!("fig01c_reverse_double_kite", 22, 42, &[2, 4], Some(20), false, R),
    fig!("fig01d_triplet_kite", 22, 41, &[2, 3, 4], None, false, R),
    fig!("fig02_harborth", 52, 104, &[4], Some(52), false, R),
    fig!("fig03", 54, 108, &[4], Some(54), false, R),
    fig!("fig04", 57, 114, &[4], Some(57), false, R),
    fig!("fig05_v1", 60, 120, &[4], Some(60), false, F),
    fig!("fig05_v2", 60, 120, &[4], Some(60), false, F),
    fig!("fig06_triplet_kite_geometry", 22, 41, &[2, 3, 4], None, false, R),
    fig!("fig07", 57, 115, &[4, 5], Some(2), false, R),
    fig!("fig08", 57, 117, &[4, 6], Some(3), false, R),
    fig!("fig09_v1", 78, 159, &[4, 7], Some(2), false, F),
    fig!("fig09_v2", 78, 159, &[4, 7], Some(2), false, F),
    fig!("fig09_v3", 78, 159, &[4, 7], Some(2), false, F),
    fig!("fig09_v4", 78, 159, &[4, 7], Some(2), false, F),
    fig!("fig10", 62, 126, &[4, 8], Some(1), false, R),
    fig!("fig16_v1", 60, 121, &[4, 5], Some(2), false, R),
    fig!("fig16_v2", 60, 121, &[4, 5], Some(2), false, R),
    fig!("fig16_v3", 60, 121, &[4, 5], Some(2), false, R),
    fig!("fig16_v4", 60, 121, &[4, 5], Some(2), false, R),
    fig!("fig17_v5", 60, 121, &[4, 5], Some(2), false, R),
    fig!("fig17_v6", 60, 121, &[4, 5], Some(2), false, R),
    fig!("fig17_v7", 60, 121, &[4, 5], Some(2), false, R),
    fig!("fig18_v1", 60, 121, &[4, 6], Some(1), false, R),
    fig!("fig18_v2", 60, 121, &[4, 6], Some(1), false, R),
    fig!("fig18_v3", 60, 121, &[4, 6], Some(1), false, R),
    fig!("fig18_v4", 60, 121, &[4, 6], Some(1), false, R),
    fig!("fig19", 62, 126, &[4, 5], Some(4), false, R),
    fig!("fig20", 62, 126, &[4, 6], Some(2), false, R),
    fig!("fig21", 62, 126, &[4, 6], Some(2), false, R),
    fig!("fig22a", 121, 192, &[4, 12], Some(1), true, None),
];

pub fn figure(id: &str) -> Option<&'static Figure> {
    FIGURES.iter().find(|f| f.id == id)
}

/// The eleven angles (degrees) around the degree-11 vertex of the (4,11)
/// graph, clockwise from the angle between the two marked edges.
pub const DEGREE_11_ANGLES: [f64; 11] = [
    32.362519660072210,
    40.49207000332465,
    25.382433534610843,
    34.890820876760450,
    32.21894760945070,
    34.514335947363630,
    29.108515978283318,
    36.31491131809427,
    29.550687898877964,
    35.065359484316880,
    30.09939768884507,
];
