use crate::chart::Chart;

/// A built-in chart with the behaviour this crate's own evaluation reports for it.
#[derive(Clone, Debug)]
pub struct CatalogEntry {
    pub id: &'static str,
    pub description: &'static str,
    pub expected: &'static str,
    pub source: &'static str,
}

impl CatalogEntry {
    pub fn chart(&self) -> Chart {
        Chart::parse(self.source).expect("built-in chart parses")
    }
}

const ENTRIES: &[CatalogEntry] = &[
    CatalogEntry {
        id: "minkowski3",
        description: "flat space, n = 3",
        expected: "R = 0; every vector is r-nongeneric for every r",
        source: include_str!("../../charts/minkowski3.chart"),
    },
    CatalogEntry {
        id: "minkowski4",
        description: "flat space, n = 4",
        expected: "R = 0; every vector is r-nongeneric for every r",
        source: include_str!("../../charts/minkowski4.chart"),
    },
    CatalogEntry {
        id: "minkowski5",
        description: "flat space, n = 5",
        expected: "R = 0; every vector is r-nongeneric for every r",
        source: include_str!("../../charts/minkowski5.chart"),
    },
    CatalogEntry {
        id: "desitter4",
        description: "constant curvature K = 1, conformally flat chart",
        expected: "R = (K/2) g∧○g and ∇R = 0; null vectors are r-nongeneric, timelike and spacelike vectors generic",
        source: include_str!("../../charts/desitter4.chart"),
    },
    CatalogEntry {
        id: "schwarzschild",
        description: "exterior Schwarzschild, m = 1, r > 2m",
        expected: "timelike vectors generic; radial null directions nongeneric at order 0",
        source: include_str!("../../charts/schwarzschild.chart"),
    },
    CatalogEntry {
        id: "flrw",
        description: "spatially flat FLRW with a(t) = e^t",
        expected: "de Sitter in flat slicing: constant curvature, null vectors nongeneric",
        source: include_str!("../../charts/flrw.chart"),
    },
    CatalogEntry {
        id: "ppwave",
        description: "plane wave with quadratic profile H = x² − y²",
        expected: "∂_v is covariantly constant and r-nongeneric for every r; ∂_u is generic",
        source: include_str!("../../charts/ppwave.chart"),
    },
];

/// All built-in charts.
pub fn catalog() -> &'static [CatalogEntry] {
    ENTRIES
}

pub fn catalog_chart(id: &str) -> Option<Chart> {
    ENTRIES.iter().find(|e| e.id == id).map(|e| e.chart())
}
