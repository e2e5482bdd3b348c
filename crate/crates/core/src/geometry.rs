//! Point clouds in `R^n` and the generators used to sample standard regions.
//!
//! Every point carries a cell radius, the radius of the small ball it stands
//! for. The default cell radius is half the distance to the nearest neighbour,
//! which keeps cells disjoint.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    dim: usize,
    coords: Vec<f64>,
    cell_radius: Vec<f64>,
}

impl PointSet {
    /// Builds a point set with the default cell radii (half nearest-neighbour distance).
    pub fn new(dim: usize, points: &[Vec<f64>]) -> Result<Self> {
        let coords = flatten(dim, points)?;
        let nn = nearest_neighbor_distances(dim, &coords)?;
        let cell_radius = nn.iter().map(|d| 0.5 * d).collect();
        Ok(Self { dim, coords, cell_radius })
    }

    /// Builds a point set with caller-provided cell radii.
    ///
    /// Radii must be positive and must not exceed half the nearest-neighbour
    /// distance, so that cells stay disjoint.
    pub fn with_radii(dim: usize, points: &[Vec<f64>], radii: &[f64]) -> Result<Self> {
        let coords = flatten(dim, points)?;
        if radii.len() != points.len() {
            return Err(Error::DimensionMismatch { expected: points.len(), found: radii.len() });
        }
        let nn = nearest_neighbor_distances(dim, &coords)?;
        for (i, (&r, &d)) in radii.iter().zip(&nn).enumerate() {
            if !(r > 0.0 && r.is_finite()) {
                return Err(Error::InvalidInput(format!("cell radius {r} of point {i} must be positive")));
            }
            if r > 0.5 * d * (1.0 + 1e-12) {
                return Err(Error::InvalidInput(format!(
                    "cell radius {r} of point {i} exceeds half its nearest-neighbour distance {d}"
                )));
            }
        }
        Ok(Self { dim, coords, cell_radius: radii.to_vec() })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.cell_radius.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cell_radius.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    pub fn cell_radius(&self, i: usize) -> f64 {
        self.cell_radius[i]
    }

    pub fn cell_radii(&self) -> &[f64] {
        &self.cell_radius
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        dist(self.point(i), self.point(j))
    }

    /// Euclidean norm of point `i`.
    pub fn norm(&self, i: usize) -> f64 {
        self.point(i).iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Smallest pairwise distance `h`.
    pub fn min_spacing(&self) -> f64 {
        2.0 * self.cell_radius.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Concatenates several raw point lists; cell radii are recomputed on the union.
    pub fn concat(dim: usize, parts: &[Vec<Vec<f64>>]) -> Result<(Self, Vec<std::ops::Range<usize>>)> {
        let mut all = Vec::new();
        let mut ranges = Vec::with_capacity(parts.len());
        for part in parts {
            let start = all.len();
            all.extend(part.iter().cloned());
            ranges.push(start..all.len());
        }
        Ok((Self::new(dim, &all)?, ranges))
    }

    /// Reads one point per row: `dim` coordinates, optionally followed by a cell radius.
    /// Either every row carries a radius or none does. A header row is allowed
    /// when it does not parse as numbers.
    pub fn read_csv<R: Read>(reader: R, dim: usize) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(reader);
        let mut points = Vec::new();
        let mut radii = Vec::new();
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let values: std::result::Result<Vec<f64>, _> = rec.iter().map(str::parse::<f64>).collect();
            let values = match values {
                Ok(v) => v,
                Err(_) if line == 0 => continue,
                Err(e) => {
                    return Err(Error::Config { location: format!("csv line {}", line + 1), message: e.to_string() })
                }
            };
            match values.len() {
                n if n == dim => points.push(values),
                n if n == dim + 1 => {
                    radii.push(values[dim]);
                    points.push(values[..dim].to_vec());
                }
                n => {
                    return Err(Error::Config {
                        location: format!("csv line {}", line + 1),
                        message: format!("expected {dim} or {} columns, found {n}", dim + 1),
                    })
                }
            }
        }
        if radii.is_empty() {
            Self::new(dim, &points)
        } else if radii.len() == points.len() {
            Self::with_radii(dim, &points, &radii)
        } else {
            Err(Error::InvalidInput("cell radius given for some rows but not all".into()))
        }
    }

    pub fn from_csv_path(path: &Path, dim: usize) -> Result<Self> {
        Self::read_csv(std::fs::File::open(path)?, dim)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header: Vec<String> = (0..self.dim).map(|k| format!("x{k}")).collect();
        header.push("cell_radius".into());
        w.write_record(&header)?;
        for (i, p) in self.points().enumerate() {
            let mut row: Vec<String> = p.iter().map(|&x| crate::report::fmt_f64(x)).collect();
            row.push(crate::report::fmt_f64(self.cell_radius[i]));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

pub(crate) fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn flatten(dim: usize, points: &[Vec<f64>]) -> Result<Vec<f64>> {
    if dim < 2 {
        return Err(Error::InvalidInput(format!("dimension must be at least 2, got {dim}")));
    }
    let mut coords = Vec::with_capacity(dim * points.len());
    for p in points {
        if p.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: p.len() });
        }
        if p.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("non-finite coordinate".into()));
        }
        coords.extend_from_slice(p);
    }
    Ok(coords)
}

fn nearest_neighbor_distances(dim: usize, coords: &[f64]) -> Result<Vec<f64>> {
    let n = coords.len() / dim;
    let mut nn = vec![f64::INFINITY; n];
    for i in 0..n {
        let pi = &coords[i * dim..(i + 1) * dim];
        for j in (i + 1)..n {
            let d = dist(pi, &coords[j * dim..(j + 1) * dim]);
            if d == 0.0 {
                return Err(Error::DuplicatePoint(i, j));
            }
            if d < nn[i] {
                nn[i] = d;
            }
            if d < nn[j] {
                nn[j] = d;
            }
        }
    }
    if n == 1 {
        // A lone point has no neighbour; give it a unit cell.
        nn[0] = 2.0;
    }
    Ok(nn)
}

/// Standard samplers. All return raw coordinate lists in deterministic order.
pub mod generators {
    use crate::error::{Error, Result};

    /// Grid points `lo + k*spacing` inside the box `[lo, hi]`, last axis fastest.
    pub fn grid_box(lo: &[f64], hi: &[f64], spacing: f64) -> Result<Vec<Vec<f64>>> {
        if lo.len() != hi.len() {
            return Err(Error::DimensionMismatch { expected: lo.len(), found: hi.len() });
        }
        if !(spacing > 0.0) {
            return Err(Error::InvalidInput("grid spacing must be positive".into()));
        }
        let counts: Vec<usize> = lo
            .iter()
            .zip(hi)
            .map(|(a, b)| if b < a { 0 } else { ((b - a) / spacing + 1e-9).floor() as usize + 1 })
            .collect();
        let mut out = Vec::new();
        let total: usize = counts.iter().product();
        for mut flat in 0..total {
            let mut p = vec![0.0; lo.len()];
            for k in (0..lo.len()).rev() {
                p[k] = lo[k] + (flat % counts[k]) as f64 * spacing;
                flat /= counts[k];
            }
            out.push(p);
        }
        Ok(out)
    }

    /// Grid points of spacing `spacing` (centred lattice) with `r_in <= |x - c| <= r_out`.
    pub fn annulus(center: &[f64], r_in: f64, r_out: f64, spacing: f64) -> Result<Vec<Vec<f64>>> {
        if !(r_out > r_in && r_in >= 0.0) {
            return Err(Error::InvalidInput(format!("annulus radii {r_in} < {r_out} required")));
        }
        let m = (r_out / spacing).ceil();
        let lo: Vec<f64> = center.iter().map(|c| c - m * spacing).collect();
        let hi: Vec<f64> = center.iter().map(|c| c + m * spacing).collect();
        Ok(grid_box(&lo, &hi, spacing)?
            .into_iter()
            .filter(|p| {
                let r = super::dist(p, center);
                r >= r_in - 1e-12 && r <= r_out + 1e-12
            })
            .collect())
    }

    /// Solid ball sampled on a centred grid.
    pub fn ball(center: &[f64], radius: f64, spacing: f64) -> Result<Vec<Vec<f64>>> {
        annulus(center, 0.0, radius, spacing)
    }

    /// Quasi-uniform points on a sphere (circle for `n = 2`, Fibonacci lattice for `n = 3`).
    pub fn sphere_shell(center: &[f64], radius: f64, count: usize) -> Result<Vec<Vec<f64>>> {
        if !(radius > 0.0) || count == 0 {
            return Err(Error::InvalidInput("sphere needs positive radius and count".into()));
        }
        match center.len() {
            2 => Ok((0..count)
                .map(|k| {
                    let t = 2.0 * std::f64::consts::PI * k as f64 / count as f64;
                    vec![center[0] + radius * t.cos(), center[1] + radius * t.sin()]
                })
                .collect()),
            3 => {
                let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
                Ok((0..count)
                    .map(|k| {
                        let z = 1.0 - 2.0 * (k as f64 + 0.5) / count as f64;
                        let r = (1.0 - z * z).sqrt();
                        let t = golden * k as f64;
                        vec![
                            center[0] + radius * r * t.cos(),
                            center[1] + radius * r * t.sin(),
                            center[2] + radius * z,
                        ]
                    })
                    .collect())
            }
            n => Err(Error::InvalidInput(format!("sphere sampler supports n = 2 or 3, got {n}"))),
        }
    }

    /// Solid cone with apex at `apex`, unit axis `axis`, opening half-angle `half_angle`
    /// (radians), truncated to `|x - apex| <= length`, sampled on a grid.
    pub fn truncated_cone(
        apex: &[f64],
        axis: &[f64],
        half_angle: f64,
        length: f64,
        spacing: f64,
    ) -> Result<Vec<Vec<f64>>> {
        let norm = axis.iter().map(|a| a * a).sum::<f64>().sqrt();
        if apex.len() != axis.len() || norm == 0.0 {
            return Err(Error::InvalidInput("cone axis must be a nonzero vector of the apex dimension".into()));
        }
        if !(half_angle > 0.0 && half_angle < std::f64::consts::FRAC_PI_2) {
            return Err(Error::InvalidInput("cone half-angle must lie in (0, pi/2)".into()));
        }
        let cos_t = half_angle.cos();
        Ok(annulus(apex, 0.0, length, spacing)?
            .into_iter()
            .filter(|p| {
                let v: Vec<f64> = p.iter().zip(apex).map(|(x, a)| x - a).collect();
                let r = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                let along = v.iter().zip(axis).map(|(x, a)| x * a).sum::<f64>() / norm;
                r > 0.0 && along >= cos_t * r - 1e-12
            })
            .collect())
    }

    /// Square planar grid `{x_last = height}` with half-width `half_width` in the other axes.
    pub fn plane_grid(dim: usize, height: f64, half_width: f64, spacing: f64) -> Result<Vec<Vec<f64>>> {
        let m = (half_width / spacing).floor();
        let mut lo = vec![-m * spacing; dim];
        let mut hi = vec![m * spacing; dim];
        lo[dim - 1] = height;
        hi[dim - 1] = height;
        grid_box(&lo, &hi, spacing)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_radius_is_half_nearest_neighbor() {
        let ps = PointSet::new(2, &[vec![0.0, 0.0], vec![1.0, 0.0], vec![3.0, 0.0]]).unwrap();
        assert_eq!(ps.cell_radii(), &[0.5, 0.5, 1.0]);
        assert_eq!(ps.min_spacing(), 1.0);
    }

    #[test]
    fn duplicates_rejected() {
        let err = PointSet::new(2, &[vec![0.0, 0.0], vec![0.0, 0.0]]).unwrap_err();
        assert!(matches!(err, Error::DuplicatePoint(0, 1)));
    }

    #[test]
    fn oversized_radius_rejected() {
        let pts = [vec![0.0, 0.0, 0.0], vec![1.0, 0.0, 0.0]];
        assert!(PointSet::with_radii(3, &pts, &[0.25, 0.5]).is_ok());
        assert!(PointSet::with_radii(3, &pts, &[0.6, 0.25]).is_err());
    }

    #[test]
    fn csv_roundtrip_with_radii() {
        let ps = PointSet::with_radii(3, &[vec![0.0, 0.0, 0.0], vec![0.0, 0.0, 1.0]], &[0.25, 0.25]).unwrap();
        let mut buf = Vec::new();
        ps.write_csv(&mut buf).unwrap();
        let back = PointSet::read_csv(buf.as_slice(), 3).unwrap();
        assert_eq!(back, ps);
    }

    #[test]
    fn csv_rejects_ragged_rows() {
        let data = "0,0,0\n1,0\n";
        assert!(PointSet::read_csv(data.as_bytes(), 3).is_err());
    }

    #[test]
    fn generators_have_expected_shapes() {
        let g = generators::grid_box(&[0.0, 0.0], &[1.0, 2.0], 0.5).unwrap();
        assert_eq!(g.len(), 3 * 5);
        let s = generators::sphere_shell(&[0.0; 3], 2.0, 100).unwrap();
        assert!(s.iter().all(|p| (dist(p, &[0.0; 3]) - 2.0).abs() < 1e-12));
        let b = generators::ball(&[0.0; 3], 2.0, 1.0).unwrap();
        assert_eq!(b.len(), 33);
        let c = generators::truncated_cone(&[0.0; 3], &[0.0, 0.0, 1.0], 0.5, 3.0, 1.0).unwrap();
        assert!(c.iter().all(|p| p[2] > 0.0));
        let p = generators::plane_grid(3, 0.0, 2.0, 1.0).unwrap();
        assert_eq!(p.len(), 25);
    }
}
