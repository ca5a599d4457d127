use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    // Graph / embedding construction
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),
    #[error("vertex index {index} out of range for {n_vertices} vertices")]
    VertexOutOfRange { index: usize, n_vertices: usize },
    #[error("non-finite coordinate at vertex {0}")]
    NonFinite(usize),
    #[error("embedding has {embedding} positions but graph has {graph} vertices")]
    SizeMismatch { graph: usize, embedding: usize },
    #[error("invalid tolerance profile: {0}")]
    InvalidTolerance(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),

    // Ingest
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("marker at ({x}, {y}) is not within snap tolerance of any vertex")]
    MarkerUnresolved { x: f64, y: f64 },
    #[error("vertices {0} and {1} are closer than the separation tolerance")]
    AmbiguousVertices(usize, usize),
    #[error("cannot normalize scale: {0}")]
    Scale(String),

    // Refinement / rigidity / flexing
    #[error("invalid gauge: {0}")]
    Gauge(String),
    #[error("graph is disconnected; analyze its components separately")]
    Disconnected,
    #[error("graph is rigid; no flex direction exists")]
    NoFlex,
    #[error("corrector diverged; reduce the step size")]
    StepTooLarge,
    #[error("monitor gradient is orthogonal to the flex space")]
    Stall,
    #[error("step budget of {0} exhausted before reaching the event")]
    Budget(usize),
    #[error("invalid monitor: {0}")]
    Monitor(String),

    // Assembly
    #[error("merging would identify adjacent vertices {0} and {1}")]
    MergeSelfLoop(usize, usize),
    #[error("pair ({a}, {b}) is at distance {distance}, not a unit")]
    NotUnitDistance { a: usize, b: usize, distance: f64 },
    #[error("edge ({0}, {1}) already exists")]
    EdgeExists(usize, usize),

    #[error("{0}")]
    Other(String),
}

pub(crate) fn check_sizes(g: &crate::Graph, emb: &crate::Embedding) -> Result<()> {
    if g.n_vertices() != emb.len() {
        return Err(Error::SizeMismatch {
            graph: g.n_vertices(),
            embedding: emb.len(),
        });
    }
    Ok(())
}
