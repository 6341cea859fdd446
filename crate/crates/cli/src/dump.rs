//! Plain-text projection dump for cross-implementation diffing: a header
//! line `d d0 kind seed S` followed by `row col value` triplets.

use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use sparse_track_core::{ProjectionKind, ProjectionMatrix};

pub fn format_projection(phi: &ProjectionMatrix) -> String {
    let kind = match phi.kind() {
        ProjectionKind::RandomGaussian => "random_gaussian",
        ProjectionKind::Hash => "hash",
    };
    let mut out =
        format!("{} {} {} {} {}\n", phi.rows(), phi.cols(), kind, phi.seed(), phi.num_seeds());
    for (row, col, value) in phi.triplets() {
        // Default float formatting is shortest-round-trip, so the dump is
        // exact.
        out.push_str(&format!("{row} {col} {value}\n"));
    }
    out
}

pub fn save_projection(path: &Path, phi: &ProjectionMatrix) -> Result<()> {
    fs::write(path, format_projection(phi))
        .with_context(|| format!("writing {}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use sparse_track_core::projection::{make_hash, make_random_gaussian};

    #[test]
    fn hash_dump_has_header_and_signed_triplets() {
        let phi = make_hash(5, 8, 2, 3).unwrap();
        let text = format_projection(&phi);
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "5 8 hash 3 2");
        for line in lines {
            let f: Vec<&str> = line.split(' ').collect();
            assert_eq!(f.len(), 3);
            let v: f64 = f[2].parse().unwrap();
            assert!(v == 1.0 || v == -1.0);
        }
    }

    #[test]
    fn dense_dump_round_trips_values() {
        let phi = make_random_gaussian(3, 4, 9).unwrap();
        let dense = phi.to_dense();
        let text = format_projection(&phi);
        for line in text.lines().skip(1) {
            let f: Vec<&str> = line.split(' ').collect();
            let (r, c): (usize, usize) = (f[0].parse().unwrap(), f[1].parse().unwrap());
            let v: f64 = f[2].parse().unwrap();
            assert_eq!(v, dense.get(r, c));
        }
        assert_eq!(text.lines().count(), 1 + 12);
    }
}
