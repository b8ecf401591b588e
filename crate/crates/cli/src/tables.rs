//! Table construction from a run config.

use anyhow::{bail, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

use flatfocus::geometry::Point2;
use flatfocus::table::{
    build_main_table, build_optimal_table, build_spiral_table, certify_main_table, C1Config, GeometryCertificate,
    HoSearch, MainTableParams, SpiralCertificate, SpiralOptions, SpiralParams, SpiralTable, Table,
};

use crate::config::{Family, RunConfig};

pub enum Built {
    Main {
        table: Table,
        params: MainTableParams,
        search: Option<HoSearch>,
        certificate: GeometryCertificate,
    },
    Spiral(SpiralTable),
    Square(Table),
}

#[derive(Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CertificateDoc<'a> {
    Main {
        passes: bool,
        params: &'a MainTableParams,
        h_o_search: Option<&'a HoSearch>,
        certificate: &'a GeometryCertificate,
    },
    Spiral {
        passes: bool,
        spiral_params: &'a SpiralParams,
        materialized: bool,
        certificate: &'a SpiralCertificate,
    },
    Square {
        passes: bool,
    },
}

pub fn build(cfg: &RunConfig) -> Result<Built> {
    let c1 = C1Config::default();
    Ok(match cfg.family {
        Family::Optimal => {
            let o = build_optimal_table(cfg.k_d, cfg.k_f, &c1)?;
            Built::Main {
                table: o.table,
                params: o.params,
                search: Some(o.search),
                certificate: o.certificate,
            }
        }
        Family::Main => {
            let Some(h) = cfg.h else { bail!("the main family needs --h") };
            let params = MainTableParams::new(cfg.k_d, cfg.k_f, h, cfg.l.unwrap_or(1.0 / cfg.k_f));
            let table = build_main_table(&params)?;
            let certificate = certify_main_table(&table, &params, &c1)?;
            Built::Main {
                table,
                params,
                search: None,
                certificate,
            }
        }
        Family::Spiral => {
            let opts = SpiralOptions {
                r0: cfg.r0,
                ..SpiralOptions::default()
            };
            Built::Spiral(build_spiral_table(cfg.k_d, cfg.k_f, &opts)?)
        }
        Family::Square => {
            let p = Point2::new;
            Built::Square(Table::flat_polygon(
                &[p(0.0, 0.0), p(1.0, 0.0), p(1.0, 1.0), p(0.0, 1.0)],
                "unit_square",
            )?)
        }
    })
}

impl Built {
    pub fn table(&self) -> Option<&Table> {
        match self {
            Built::Main { table, .. } | Built::Square(table) => Some(table),
            Built::Spiral(s) => s.table.as_ref(),
        }
    }

    /// The materialized table, or an error naming why there is none.
    pub fn require_table(&self) -> Result<&Table> {
        match self.table() {
            Some(t) => Ok(t),
            None => bail!("the spiral has too many pieces to materialize; use a larger k_f"),
        }
    }

    pub fn passes(&self) -> bool {
        match self {
            Built::Main { certificate, .. } => certificate.passes(),
            Built::Spiral(s) => s.certificate.passes(),
            Built::Square(_) => true,
        }
    }

    /// Content hash of the table, or of the spiral parameters when the
    /// boundary was not materialized.
    pub fn hash(&self) -> String {
        match (self.table(), self) {
            (Some(t), _) => t.content_hash(),
            (None, Built::Spiral(s)) => {
                let json = flatfocus::json::to_string(&s.layout.params).expect("params serialize");
                Sha256::digest(json.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
            }
            (None, _) => unreachable!("only spirals can be left unmaterialized"),
        }
    }

    pub fn certificate(&self) -> CertificateDoc<'_> {
        let passes = self.passes();
        match self {
            Built::Main {
                params,
                search,
                certificate,
                ..
            } => CertificateDoc::Main {
                passes,
                params,
                h_o_search: search.as_ref(),
                certificate,
            },
            Built::Spiral(s) => CertificateDoc::Spiral {
                passes,
                spiral_params: &s.layout.params,
                materialized: s.table.is_some(),
                certificate: &s.certificate,
            },
            Built::Square(_) => CertificateDoc::Square { passes },
        }
    }
}
