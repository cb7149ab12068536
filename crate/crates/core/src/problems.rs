//! Test problems: convection–diffusion finite differences and Matrix Market
//! files.
//!
//! The PDE family is
//!
//! ```text
//! -d/dx(ω u_x) - d/dy(γ u_y) + d/dx(μ u) + d/dy(ν u) = λ u
//! ```
//!
//! on (-1,1)² with homogeneous Dirichlet boundaries. The diffusion
//! coefficients ω, γ are negative, so the assembled 5-point scheme
//! (midpoint diffusion values, centered convection) carries a large
//! negative-definite diffusion part: the spectrum fills a long interval on
//! the left of the complex plane and the sought rightmost eigenvalues sit
//! close together near its right end. Mesh width is `h = 2/(N+1)` on an
//! N×N interior grid, rows ordered lexicographically (y outer, x inner),
//! giving an n = N² sparse matrix with at most five nonzeros per row.

use crate::csr::CsrMatrix;
use crate::{Error, Result};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

/// Coefficient family of the convection–diffusion operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PdeCoefficients {
    /// ω = -1, γ = -10/(1+xy), μ = 1, ν = 1/(1+xy)
    CaseI,
    /// ω = -e^{xy}, γ = -10/(1+xy), μ = sin(1+xy), ν = 1/(1+xy)
    CaseII,
}

impl PdeCoefficients {
    /// ω: x-diffusion coefficient.
    pub fn diffusion_x(self, x: f64, y: f64) -> f64 {
        match self {
            PdeCoefficients::CaseI => -1.0,
            PdeCoefficients::CaseII => -(x * y).exp(),
        }
    }

    /// γ: y-diffusion coefficient.
    pub fn diffusion_y(self, x: f64, y: f64) -> f64 {
        match self {
            PdeCoefficients::CaseI | PdeCoefficients::CaseII => -10.0 / (1.0 + x * y),
        }
    }

    /// μ: x-convection coefficient.
    pub fn convection_x(self, x: f64, y: f64) -> f64 {
        match self {
            PdeCoefficients::CaseI => 1.0,
            PdeCoefficients::CaseII => (1.0 + x * y).sin(),
        }
    }

    /// ν: y-convection coefficient.
    pub fn convection_y(self, x: f64, y: f64) -> f64 {
        match self {
            PdeCoefficients::CaseI | PdeCoefficients::CaseII => 1.0 / (1.0 + x * y),
        }
    }
}

/// A discretized problem instance: coefficient family plus interior grid
/// points per dimension (matrix dimension is `n = N²`).
#[derive(Debug, Clone, Copy)]
pub struct PdeCase {
    pub coefficients: PdeCoefficients,
    pub n_grid: usize,
}

impl PdeCase {
    pub fn new(coefficients: PdeCoefficients, n_grid: usize) -> Self {
        assert!(n_grid >= 1, "grid must have at least one interior point");
        PdeCase { coefficients, n_grid }
    }

    /// Mesh width `h = 2/(N+1)` on the width-2 domain.
    pub fn mesh_width(&self) -> f64 {
        2.0 / (self.n_grid as f64 + 1.0)
    }
}

/// Assembles the 5-point stencil matrix for `case`. Boundary (Dirichlet)
/// neighbors are dropped.
pub fn assemble_pde(case: &PdeCase) -> CsrMatrix {
    let ng = case.n_grid;
    let n = ng * ng;
    let h = case.mesh_width();
    let h2 = h * h;
    let co = case.coefficients;
    let grid = |k: usize| -1.0 + (k as f64 + 1.0) * h;

    let mut triplets: Vec<(usize, usize, f64)> = Vec::with_capacity(5 * n);
    for j in 0..ng {
        let y = grid(j);
        for i in 0..ng {
            let x = grid(i);
            let row = j * ng + i;
            let wxp = co.diffusion_x(x + 0.5 * h, y);
            let wxm = co.diffusion_x(x - 0.5 * h, y);
            let wyp = co.diffusion_y(x, y + 0.5 * h);
            let wym = co.diffusion_y(x, y - 0.5 * h);
            triplets.push((row, row, (wxp + wxm + wyp + wym) / h2));
            if i + 1 < ng {
                triplets.push((row, row + 1, -wxp / h2 + co.convection_x(x + h, y) / (2.0 * h)));
            }
            if i > 0 {
                triplets.push((row, row - 1, -wxm / h2 - co.convection_x(x - h, y) / (2.0 * h)));
            }
            if j + 1 < ng {
                triplets.push((row, row + ng, -wyp / h2 + co.convection_y(x, y + h) / (2.0 * h)));
            }
            if j > 0 {
                triplets.push((row, row - ng, -wym / h2 - co.convection_y(x, y - h) / (2.0 * h)));
            }
        }
    }
    CsrMatrix::from_triplets(n, &triplets).expect("stencil triplets are in range")
}

/// Reads a Matrix Market coordinate file (real, general or symmetric).
/// Duplicate entries are summed; symmetric storage is expanded.
pub fn load_matrix_market<P: AsRef<Path>>(path: P) -> Result<CsrMatrix> {
    let file = File::open(path.as_ref())?;
    let reader = BufReader::new(file);
    let mut lines = reader.lines().enumerate();

    let (header_no, header) = loop {
        match lines.next() {
            Some((no, line)) => {
                let line = line?;
                if !line.trim().is_empty() {
                    break (no + 1, line);
                }
            }
            None => {
                return Err(Error::Parse { line: 1, msg: "empty file".into() });
            }
        }
    };
    let tokens: Vec<String> =
        header.split_whitespace().map(|t| t.to_ascii_lowercase()).collect();
    if tokens.len() < 5 || !tokens[0].eq_ignore_ascii_case("%%MatrixMarket") {
        return Err(Error::Parse {
            line: header_no,
            msg: "expected header '%%MatrixMarket matrix coordinate real general|symmetric'"
                .into(),
        });
    }
    if tokens[1] != "matrix" || tokens[2] != "coordinate" {
        return Err(Error::Parse {
            line: header_no,
            msg: format!("unsupported object/format '{} {}'", tokens[1], tokens[2]),
        });
    }
    if tokens[3] != "real" {
        return Err(Error::Parse {
            line: header_no,
            msg: format!("unsupported field '{}', only 'real' is handled", tokens[3]),
        });
    }
    let symmetric = match tokens[4].as_str() {
        "general" => false,
        "symmetric" => true,
        other => {
            return Err(Error::Parse {
                line: header_no,
                msg: format!("unsupported symmetry '{other}'"),
            });
        }
    };

    let mut size: Option<(usize, usize, usize)> = None;
    let mut triplets: Vec<(usize, usize, f64)> = Vec::new();
    let mut seen = 0usize;
    for (no, line) in lines {
        let line = line?;
        let text = line.trim();
        if text.is_empty() || text.starts_with('%') {
            continue;
        }
        let lineno = no + 1;
        let parts: Vec<&str> = text.split_whitespace().collect();
        match size {
            None => {
                if parts.len() != 3 {
                    return Err(Error::Parse {
                        line: lineno,
                        msg: "size line must be 'rows cols nnz'".into(),
                    });
                }
                let nums: Result<Vec<usize>> = parts
                    .iter()
                    .map(|p| {
                        p.parse::<usize>().map_err(|_| Error::Parse {
                            line: lineno,
                            msg: format!("bad size entry '{p}'"),
                        })
                    })
                    .collect();
                let nums = nums?;
                if nums[0] != nums[1] {
                    return Err(Error::Parse {
                        line: lineno,
                        msg: format!("matrix must be square, got {}x{}", nums[0], nums[1]),
                    });
                }
                size = Some((nums[0], nums[1], nums[2]));
                triplets.reserve(nums[2]);
            }
            Some((rows, _, nnz)) => {
                if seen == nnz {
                    return Err(Error::Parse {
                        line: lineno,
                        msg: format!("more than the declared {nnz} entries"),
                    });
                }
                if parts.len() != 3 {
                    return Err(Error::Parse {
                        line: lineno,
                        msg: "entry line must be 'i j value'".into(),
                    });
                }
                let i: usize = parts[0].parse().map_err(|_| Error::Parse {
                    line: lineno,
                    msg: format!("bad row index '{}'", parts[0]),
                })?;
                let j: usize = parts[1].parse().map_err(|_| Error::Parse {
                    line: lineno,
                    msg: format!("bad column index '{}'", parts[1]),
                })?;
                let v: f64 = parts[2].parse().map_err(|_| Error::Parse {
                    line: lineno,
                    msg: format!("bad value '{}'", parts[2]),
                })?;
                if i < 1 || i > rows || j < 1 || j > rows {
                    return Err(Error::Parse {
                        line: lineno,
                        msg: format!("index ({i}, {j}) outside 1..={rows}"),
                    });
                }
                triplets.push((i - 1, j - 1, v));
                if symmetric && i != j {
                    triplets.push((j - 1, i - 1, v));
                }
                seen += 1;
            }
        }
    }
    let (rows, _, nnz) = size.ok_or(Error::Parse { line: header_no, msg: "missing size line".into() })?;
    if seen != nnz {
        return Err(Error::Parse {
            line: 0,
            msg: format!("file ended after {seen} of {nnz} declared entries"),
        });
    }
    CsrMatrix::from_triplets(rows, &triplets)
}

/// Writes `a` as a Matrix Market coordinate / real / general file with full
/// `f64` precision (round-trips exactly).
pub fn write_matrix_market<P: AsRef<Path>>(path: P, a: &CsrMatrix) -> Result<()> {
    let mut out = BufWriter::new(File::create(path.as_ref())?);
    writeln!(out, "%%MatrixMarket matrix coordinate real general")?;
    writeln!(out, "{} {} {}", a.n(), a.n(), a.nnz())?;
    for i in 0..a.n() {
        let (cols, vals) = a.row(i);
        for (&j, &v) in cols.iter().zip(vals) {
            writeln!(out, "{} {} {:.16e}", i + 1, j + 1, v)?;
        }
    }
    out.flush()?;
    Ok(())
}
