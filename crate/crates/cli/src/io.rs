//! Adjacency file formats and atomic writes.
//!
//! Two input formats, auto-detected by the first line:
//! - edge list: header `# n=<count>`, then one `i j` (or `i,j`) pair per
//!   line, 0-based indices, undirected;
//! - dense CSV: n rows of n comma-separated 0/1 values.
//!
//! All writes go through a temp-file-and-rename so interrupted runs never
//! leave truncated outputs behind.

use std::fs;
use std::path::Path;

use loosmooth::graphon::Adjacency;

use crate::CliError;

pub fn read_adjacency(path: &Path, symmetrize: bool) -> Result<Adjacency, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    parse_adjacency(&text, symmetrize)
}

pub fn parse_adjacency(text: &str, symmetrize: bool) -> Result<Adjacency, CliError> {
    let first = text
        .lines()
        .map(str::trim)
        .find(|l| !l.is_empty())
        .ok_or_else(|| CliError::Input("empty adjacency file".to_string()))?;
    if first.starts_with('#') {
        parse_edge_list(text, symmetrize)
    } else {
        parse_dense_csv(text, symmetrize)
    }
}

fn parse_edge_list(text: &str, symmetrize: bool) -> Result<Adjacency, CliError> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
    let header = lines.next().unwrap();
    let n: usize = header
        .strip_prefix('#')
        .map(str::trim)
        .and_then(|h| h.strip_prefix("n="))
        .and_then(|v| v.trim().parse().ok())
        .ok_or_else(|| {
            CliError::Input(format!(
                "edge list must start with '# n=<count>', got '{header}'"
            ))
        })?;
    if n < 3 {
        return Err(CliError::Input(format!("node count {n} too small")));
    }
    let mut entries = vec![0u8; n * n];
    for line in lines {
        if line.starts_with('#') {
            continue;
        }
        let mut parts = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|p| !p.is_empty());
        let (i, j) = match (parts.next(), parts.next(), parts.next()) {
            (Some(a), Some(b), None) => {
                let i: usize = a
                    .parse()
                    .map_err(|_| CliError::Input(format!("bad edge line '{line}'")))?;
                let j: usize = b
                    .parse()
                    .map_err(|_| CliError::Input(format!("bad edge line '{line}'")))?;
                (i, j)
            }
            _ => return Err(CliError::Input(format!("bad edge line '{line}'"))),
        };
        if i >= n || j >= n {
            return Err(CliError::Input(format!(
                "edge ({i}, {j}) out of range for n = {n}"
            )));
        }
        if i == j {
            if symmetrize {
                continue; // diagonal is forced to zero
            }
            return Err(CliError::Input(format!("self-loop at node {i}")));
        }
        entries[i * n + j] = 1;
        entries[j * n + i] = 1;
    }
    Adjacency::from_dense(n, entries).map_err(|e| CliError::Input(e.to_string()))
}

fn parse_dense_csv(text: &str, symmetrize: bool) -> Result<Adjacency, CliError> {
    let rows: Vec<&str> = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .collect();
    let n = rows.len();
    if n < 3 {
        return Err(CliError::Input(format!("node count {n} too small")));
    }
    let mut entries = vec![0u8; n * n];
    for (i, row) in rows.iter().enumerate() {
        let values: Vec<&str> = row
            .split(',')
            .map(str::trim)
            .filter(|v| !v.is_empty())
            .collect();
        if values.len() != n {
            return Err(CliError::Input(format!(
                "row {i} has {} values, expected {n}",
                values.len()
            )));
        }
        for (j, v) in values.iter().enumerate() {
            let parsed: i64 = v
                .parse()
                .map_err(|_| CliError::Input(format!("non-binary value '{v}' at ({i}, {j})")))?;
            if parsed != 0 && parsed != 1 {
                return Err(CliError::Input(format!(
                    "non-binary value {parsed} at ({i}, {j})"
                )));
            }
            entries[i * n + j] = parsed as u8;
        }
    }
    if symmetrize {
        for i in 0..n {
            entries[i * n + i] = 0;
            for j in (i + 1)..n {
                let v = entries[i * n + j] | entries[j * n + i];
                entries[i * n + j] = v;
                entries[j * n + i] = v;
            }
        }
    }
    Adjacency::from_dense(n, entries).map_err(|e| CliError::Input(e.to_string()))
}

/// Edge-list serialization (the `--dump-adjacency` format).
pub fn adjacency_to_edge_list(a: &Adjacency) -> String {
    let n = a.n();
    let mut out = format!("# n={n}\n");
    for i in 0..n {
        for j in (i + 1)..n {
            if a.is_edge(i, j) {
                out.push_str(&format!("{i} {j}\n"));
            }
        }
    }
    out
}

/// Write via temp file + rename in the destination directory.
pub fn write_atomic(path: &Path, content: &str) -> Result<(), CliError> {
    let err = |e: std::io::Error| CliError::Input(format!("cannot write {}: {e}", path.display()));
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = std::path::PathBuf::from(tmp);
    fs::write(&tmp, content).map_err(err)?;
    fs::rename(&tmp, path).map_err(err)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edge_list_round_trips() {
        let mut a = Adjacency::empty(5);
        a.set_edge(0, 3, true);
        a.set_edge(1, 2, true);
        let text = adjacency_to_edge_list(&a);
        let back = parse_adjacency(&text, false).unwrap();
        assert_eq!(a, back);
    }

    #[test]
    fn edge_list_rejects_self_loop_unless_symmetrizing() {
        let text = "# n=4\n0 1\n2 2\n";
        let err = parse_adjacency(text, false).unwrap_err();
        assert!(err.to_string().contains("self-loop at node 2"));
        let ok = parse_adjacency(text, true).unwrap();
        assert!(ok.is_edge(0, 1));
        assert!(!ok.is_edge(2, 2));
    }

    #[test]
    fn dense_csv_parses_and_validates() {
        let text = "0,1,0\n1,0,1\n0,1,0\n";
        let a = parse_adjacency(text, false).unwrap();
        assert!(a.is_edge(0, 1) && a.is_edge(1, 2) && !a.is_edge(0, 2));

        let asym = "0,1,0\n0,0,1\n0,1,0\n";
        let err = parse_adjacency(asym, false).unwrap_err();
        assert!(err.to_string().contains("asymmetric"));
        let fixed = parse_adjacency(asym, true).unwrap();
        assert!(fixed.is_edge(0, 1));

        let nonbin = "0,2,0\n2,0,1\n0,1,0\n";
        let err = parse_adjacency(nonbin, false).unwrap_err();
        assert!(err.to_string().contains("non-binary value 2 at (0, 1)"));

        let diag = "1,1,0\n1,0,1\n0,1,0\n";
        let err = parse_adjacency(diag, false).unwrap_err();
        assert!(err.to_string().contains("self-loop at node 0"));
    }

    #[test]
    fn commas_and_whitespace_both_work_in_edge_lists() {
        let a = parse_adjacency("# n=4\n0,1\n2 3\n", false).unwrap();
        assert!(a.is_edge(0, 1) && a.is_edge(2, 3));
    }
}
