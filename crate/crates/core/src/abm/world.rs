use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CellKind {
    Floor,
    Wall,
    Workplace,
}

impl CellKind {
    pub fn is_walkable(self) -> bool {
        !matches!(self, CellKind::Wall)
    }
}

/// Rectangular grid workplace. Cells are 1.5 m squares; the border is wall.
///
/// Neighbourhoods and the workplace slowdown zone are precomputed at
/// construction, the world is immutable afterwards and shared read-only by
/// all replications.
#[derive(Debug, Clone, PartialEq)]
pub struct World {
    width: usize,
    height: usize,
    cells: Vec<CellKind>,
    walkable: Vec<usize>,
    orthogonal: Vec<Vec<usize>>,
    diagonal: Vec<Vec<usize>>,
    near_workplace: Vec<bool>,
}

impl World {
    /// Edge length of one cell, m.
    pub const CELL_SIZE: f64 = 1.5;

    /// Builds a world from row-major cells. The outer border must be wall and
    /// at least one cell must be walkable.
    pub fn new(width: usize, height: usize, cells: Vec<CellKind>) -> Result<Self> {
        if width < 3 || height < 3 {
            return Err(Error::invalid("world", format!("{width}x{height} is smaller than 3x3")));
        }
        if cells.len() != width * height {
            return Err(Error::invalid(
                "world",
                format!("{} cells for a {width}x{height} grid", cells.len()),
            ));
        }
        for y in 0..height {
            for x in 0..width {
                let border = x == 0 || y == 0 || x == width - 1 || y == height - 1;
                if border && cells[y * width + x] != CellKind::Wall {
                    return Err(Error::invalid("world", format!("border cell ({x}, {y}) is not a wall")));
                }
            }
        }
        let walkable: Vec<usize> = (0..cells.len()).filter(|&i| cells[i].is_walkable()).collect();
        if walkable.is_empty() {
            return Err(Error::invalid("world", "no floor or workplace cells"));
        }

        let offsets = |deltas: &[(isize, isize)]| -> Vec<Vec<usize>> {
            (0..cells.len())
                .map(|i| {
                    if !cells[i].is_walkable() {
                        return Vec::new();
                    }
                    let (x, y) = ((i % width) as isize, (i / width) as isize);
                    deltas
                        .iter()
                        .map(|(dx, dy)| ((y + dy) as usize) * width + (x + dx) as usize)
                        .filter(|&j| cells[j].is_walkable())
                        .collect()
                })
                .collect()
        };
        // the wall border keeps every offset in range
        let orthogonal = offsets(&[(0, -1), (1, 0), (0, 1), (-1, 0)]);
        let diagonal = offsets(&[(1, -1), (1, 1), (-1, 1), (-1, -1)]);

        let near_workplace = (0..cells.len())
            .map(|i| {
                cells[i] == CellKind::Workplace
                    || orthogonal[i].iter().any(|&j| cells[j] == CellKind::Workplace)
            })
            .collect();

        Ok(Self {
            width,
            height,
            cells,
            walkable,
            orthogonal,
            diagonal,
            near_workplace,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn cells(&self) -> &[CellKind] {
        &self.cells
    }

    pub fn kind(&self, cell: usize) -> CellKind {
        self.cells[cell]
    }

    pub fn kind_at(&self, x: usize, y: usize) -> CellKind {
        self.cells[y * self.width + x]
    }

    pub fn coords(&self, cell: usize) -> (usize, usize) {
        (cell % self.width, cell / self.width)
    }

    pub fn index(&self, x: usize, y: usize) -> usize {
        y * self.width + x
    }

    /// Non-wall cells in row-major order.
    pub fn walkable_cells(&self) -> &[usize] {
        &self.walkable
    }

    /// Non-wall orthogonal neighbours of `cell`.
    pub fn orthogonal_neighbors(&self, cell: usize) -> &[usize] {
        &self.orthogonal[cell]
    }

    /// Non-wall diagonal neighbours of `cell`.
    pub fn diagonal_neighbors(&self, cell: usize) -> &[usize] {
        &self.diagonal[cell]
    }

    /// On, or orthogonally adjacent to, a workplace cell.
    pub fn near_workplace(&self, cell: usize) -> bool {
        self.near_workplace[cell]
    }

    pub fn workplace_count(&self) -> usize {
        self.cells.iter().filter(|c| **c == CellKind::Workplace).count()
    }
}
