//! A boundary bundled with the acceleration structures every check reuses.

use std::ops::Deref;
use std::sync::Arc;

use crate::boundary::Boundary;
use crate::error::Result;
use crate::intrinsic::Graph;
use crate::spatial::SpatialGrid;

/// Boundary plus spatial grid and neighbour graph.
///
/// Rescaling the normals (`with_radius`) keeps the grid and graph, which
/// depend only on the sample positions.
#[derive(Debug, Clone)]
pub struct IndexedBoundary {
    boundary: Boundary,
    grid: Arc<SpatialGrid>,
    graph: Arc<Graph>,
}

impl IndexedBoundary {
    /// Indexes `boundary` with the default graph step cap of twice the
    /// sampling resolution.
    pub fn new(boundary: Boundary) -> Result<Self> {
        let cap = 2.0 * boundary.resolution_h();
        Self::with_step_cap(boundary, cap)
    }

    pub fn with_step_cap(boundary: Boundary, step_cap: f64) -> Result<Self> {
        let (lo, hi) = boundary.bounding_box();
        let diag = (hi - lo).norm();
        let cell = (2.0 * boundary.resolution_h()).max(diag / 256.0);
        let points: Vec<_> = boundary.samples().iter().map(|s| s.point).collect();
        let grid = Arc::new(SpatialGrid::new(&points, cell));
        let graph = Arc::new(Graph::build(&boundary, &grid, step_cap)?);
        Ok(Self { boundary, grid, graph })
    }

    /// Same samples with normals rescaled to length `r`.
    pub fn with_radius(&self, r: f64) -> Result<Self> {
        Ok(Self {
            boundary: self.boundary.with_radius(r)?,
            grid: Arc::clone(&self.grid),
            graph: Arc::clone(&self.graph),
        })
    }

    pub fn boundary(&self) -> &Boundary {
        &self.boundary
    }

    pub fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn into_boundary(self) -> Boundary {
        self.boundary
    }
}

impl Deref for IndexedBoundary {
    type Target = Boundary;

    fn deref(&self) -> &Boundary {
        &self.boundary
    }
}
