use std::fmt;
use std::path::{Path, PathBuf};

use clap::Args;
use matchstick::figures::figure;
use matchstick::ingest::{ingest_tikz, read_msg};
use matchstick::refiner::{refine, RefineOptions, RefineReport};
use matchstick::{Embedding, Graph, ToleranceProfile};

/// Exit status 1 (a check failed or the numerics gave up) or 2 (bad
/// invocation or unreadable input).
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self { code: 2, message: message.into() }
    }

    pub fn failed(message: impl Into<String>) -> Self {
        Self { code: 1, message: message.into() }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<matchstick::Error> for CliError {
    fn from(e: matchstick::Error) -> Self {
        use matchstick::Error::*;
        let code = match e {
            SelfLoop(_)
            | DuplicateEdge(..)
            | VertexOutOfRange { .. }
            | NonFinite(_)
            | SizeMismatch { .. }
            | InvalidTolerance(_)
            | Parse { .. }
            | MarkerUnresolved { .. }
            | Scale(_)
            | Monitor(_)
            | Gauge(_) => 2,
            _ => 1,
        };
        Self { code, message: e.to_string() }
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Where a graph comes from. Exactly one source must be given.
#[derive(Debug, Clone, Args)]
#[group(required = true, multiple = false)]
pub struct InputArgs {
    /// Graph in MSG format.
    #[arg(long, value_name = "PATH")]
    pub msg: Option<PathBuf>,
    /// TikZ drawing; parsed, snapped and scaled to unit edges.
    #[arg(long, value_name = "PATH")]
    pub tikz: Option<PathBuf>,
    /// One of the bundled figures, by id (see `ingest --list`).
    #[arg(long, value_name = "ID")]
    pub figure: Option<String>,
}

#[derive(Debug, Clone)]
pub struct Loaded {
    pub graph: Graph,
    pub embedding: Embedding,
    /// `(vertex, name)` pairs.
    pub names: Vec<(usize, String)>,
}

impl Loaded {
    /// A vertex given by id or by name.
    pub fn vertex(&self, token: &str) -> CliResult<usize> {
        let token = token.trim();
        let v = match token.parse::<usize>() {
            Ok(v) => v,
            Err(_) => self
                .names
                .iter()
                .find(|(_, n)| n == token)
                .map(|&(v, _)| v)
                .ok_or_else(|| CliError::usage(format!("no vertex named {token:?}")))?,
        };
        if v >= self.graph.n_vertices() {
            return Err(CliError::usage(format!(
                "vertex {v} out of range ({} vertices)",
                self.graph.n_vertices()
            )));
        }
        Ok(v)
    }
}

pub fn read_text(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))
}

pub fn write_text(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(|e| CliError::failed(format!("{}: {e}", path.display())))
}

pub fn load_tikz_text(text: &str, tol: &ToleranceProfile) -> CliResult<Loaded> {
    let ing = ingest_tikz(text, tol)?;
    let names = ing.name_list();
    Ok(Loaded { graph: ing.graph, embedding: ing.embedding, names })
}

pub fn load_msg_text(text: &str) -> CliResult<Loaded> {
    let doc = read_msg(text)?;
    Ok(Loaded { graph: doc.graph, embedding: doc.embedding, names: doc.names })
}

pub fn figure_text(id: &str) -> CliResult<&'static str> {
    figure(id)
        .map(|f| f.tikz)
        .ok_or_else(|| CliError::usage(format!("unknown figure {id:?}; try `ingest --list`")))
}

pub fn load(input: &InputArgs, tol: &ToleranceProfile) -> CliResult<Loaded> {
    if let Some(p) = &input.msg {
        load_msg_text(&read_text(p)?)
    } else if let Some(p) = &input.tikz {
        load_tikz_text(&read_text(p)?, tol)
    } else if let Some(id) = &input.figure {
        load_tikz_text(figure_text(id)?, tol)
    } else {
        Err(CliError::usage("one of --msg, --tikz or --figure is required"))
    }
}

/// Edge-length slack below which an embedding counts as already refined.
pub const REFINED: f64 = 1e-12;

/// Refine unless the embedding is already at machine precision. Returns
/// the report when refinement ran.
pub fn ensure_refined(g: &Graph, emb: &Embedding) -> CliResult<(Embedding, Option<RefineReport>)> {
    if g.n_edges() == 0 || emb.max_abs_length_deviation(g) <= REFINED {
        return Ok((emb.clone(), None));
    }
    let (out, rep) = refine(g, emb, &RefineOptions::default())?;
    if !rep.converged {
        return Err(CliError::failed(format!(
            "refinement did not converge (max |len - 1| = {:.3e} after {} iterations)",
            rep.final_max_abs_residual, rep.iterations
        )));
    }
    Ok((out, Some(rep)))
}

/// Parse `"a,b"` into two values.
pub fn parse_pair<T: std::str::FromStr>(s: &str, what: &str) -> CliResult<(T, T)> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if let [a, b] = parts[..] {
        if let (Ok(a), Ok(b)) = (a.parse(), b.parse()) {
            return Ok((a, b));
        }
    }
    Err(CliError::usage(format!("{what}: expected two comma-separated values, got {s:?}")))
}

/// Smallest and largest degree: the profile a graph would have to satisfy.
pub fn inferred_profile(g: &Graph) -> (usize, usize) {
    let d = g.degrees();
    (
        d.iter().copied().min().unwrap_or(0),
        d.iter().copied().max().unwrap_or(0),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    const PATH: &str = "v 0 0 0\nv 1 1 0\nv 2 2 0\ne 0 1\ne 1 2\nn 2 tip\n";

    #[test]
    fn pairs() {
        assert_eq!(parse_pair::<usize>(" 4, 6", "--profile").unwrap(), (4, 6));
        assert_eq!(parse_pair::<usize>("4", "--profile").unwrap_err().code, 2);
        assert!(parse_pair::<usize>("4,x", "--profile").is_err());
    }

    #[test]
    fn vertices_by_id_or_name() {
        let l = load_msg_text(PATH).unwrap();
        assert_eq!(l.vertex("tip").unwrap(), 2);
        assert_eq!(l.vertex(" 1 ").unwrap(), 1);
        assert_eq!(l.vertex("3").unwrap_err().code, 2);
        assert_eq!(l.vertex("toe").unwrap_err().code, 2);
    }

    #[test]
    fn profile_spans_the_degrees() {
        let l = load_msg_text(PATH).unwrap();
        assert_eq!(inferred_profile(&l.graph), (1, 2));
    }

    #[test]
    fn refined_input_is_left_alone() {
        let l = load_msg_text(PATH).unwrap();
        let (emb, rep) = ensure_refined(&l.graph, &l.embedding).unwrap();
        assert!(rep.is_none());
        assert_eq!(emb, l.embedding);
        let stretched = load_msg_text("v 0 0 0\nv 1 1.001 0\ne 0 1\n").unwrap();
        let (emb, rep) = ensure_refined(&stretched.graph, &stretched.embedding).unwrap();
        assert!(rep.unwrap().converged);
        assert!(emb.max_abs_length_deviation(&stretched.graph) <= REFINED);
    }

    #[test]
    fn unknown_figure_is_a_usage_error() {
        assert_eq!(figure_text("fig99").unwrap_err().code, 2);
    }
}
