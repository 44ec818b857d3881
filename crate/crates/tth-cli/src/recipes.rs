//! Analysis recipes behind a common trait, registered by name and selected
//! from the command line.

use chrono::NaiveDate;

use tth_core::algebra::{self, DistanceRegistry};
use tth_core::analytics;
use tth_core::{Result, TermId, Tth, TthError};

use crate::output::{PlotSeries, Table};

/// Parameters shared by the analyze subcommand.
#[derive(Debug, Clone)]
pub struct AnalyzeParams {
    pub k: usize,
    pub theta: f64,
    pub alpha: f64,
    pub count_threshold: u64,
    pub anchor: Option<String>,
    pub terms: Vec<String>,
    pub width: Option<i64>,
    pub window: Option<(NaiveDate, NaiveDate)>,
    pub group_by: Option<String>,
    pub metric: String,
    pub jaccard: Option<f64>,
}

pub struct RecipeContext<'a> {
    pub tth: &'a Tth,
    pub other: Option<&'a Tth>,
    pub params: &'a AnalyzeParams,
}

pub struct RecipeOutput {
    pub table: Table,
    pub plots: Vec<PlotSeries>,
}

/// An analysis recipe: a named report over one or two histograms.
pub trait Recipe {
    fn name(&self) -> &'static str;
    fn run(&self, ctx: &RecipeContext) -> Result<RecipeOutput>;
}

pub struct RecipeRegistry {
    recipes: Vec<Box<dyn Recipe>>,
}

impl RecipeRegistry {
    pub fn builtin() -> Self {
        RecipeRegistry {
            recipes: vec![
                Box::new(Cooccur),
                Box::new(Salience),
                Box::new(Trendy),
                Box::new(Sync),
                Box::new(TfIdf),
                Box::new(Distance),
            ],
        }
    }

    pub fn get(&self, name: &str) -> Result<&dyn Recipe> {
        self.recipes
            .iter()
            .map(|r| r.as_ref())
            .find(|r| r.name() == name)
            .ok_or_else(|| {
                TthError::Registry(format!(
                    "unknown recipe '{name}' (available: {})",
                    self.names().join(", ")
                ))
            })
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.recipes.iter().map(|r| r.name()).collect()
    }
}

fn require_terms(ctx: &RecipeContext) -> Result<Vec<TermId>> {
    if ctx.params.terms.is_empty() {
        return Err(TthError::Argument(
            "this recipe needs --terms with at least one term".into(),
        ));
    }
    ctx.params
        .terms
        .iter()
        .map(|t| ctx.tth.vocab().require(t))
        .collect()
}

/// Counts of a term per interval, aux folded, as plot points.
fn term_series(tth: &Tth, term: TermId) -> PlotSeries {
    let mut per_interval: std::collections::BTreeMap<i64, u64> = Default::default();
    for (key, data) in tth.iter() {
        if key.term == term {
            *per_interval.entry(key.interval).or_default() += data.count;
        }
    }
    PlotSeries {
        name: tth.vocab().term(term).unwrap_or("term").to_string(),
        points: per_interval
            .into_iter()
            .map(|(i, c)| (tth.interval_start(i).to_string(), c.to_string()))
            .collect(),
    }
}

struct Cooccur;

impl Recipe for Cooccur {
    fn name(&self) -> &'static str {
        "cooccur"
    }

    fn run(&self, ctx: &RecipeContext) -> Result<RecipeOutput> {
        let anchor = ctx.params.anchor.as_deref().ok_or_else(|| {
            TthError::Argument("cooccur needs --anchor".into())
        })?;
        let width = ctx.params.width.unwrap_or(5);
        let groups = analytics::topic_cooccurrence(
            ctx.tth,
            anchor,
            width,
            ctx.params.k,
            ctx.params.group_by.as_deref(),
        )?;

        let mut table = Table::new(vec!["group", "intervals", "terms"]);
        for g in &groups {
            table.push(vec![
                g.key.join("/"),
                g.intervals
                    .iter()
                    .map(|i| i.to_string())
                    .collect::<Vec<_>>()
                    .join(";"),
                g.terms.join(";"),
            ]);
        }
        let anchor_id = ctx.tth.vocab().require(anchor)?;
        Ok(RecipeOutput {
            table,
            plots: vec![term_series(ctx.tth, anchor_id)],
        })
    }
}

struct Salience;

impl Recipe for Salience {
    fn name(&self) -> &'static str {
        "salience"
    }

    fn run(&self, ctx: &RecipeContext) -> Result<RecipeOutput> {
        let terms = require_terms(ctx)?;
        let week = ctx.params.width.unwrap_or(7);
        let result = analytics::salience(
            ctx.tth,
            &terms,
            ctx.params.count_threshold,
            ctx.params.alpha,
            week,
        )?;

        let mut table = Table::new(vec!["week_start", "r_sum", "p_value", "significant"]);
        table.push(vec![
            ctx.tth.interval_start(result.best_week).to_string(),
            result.best_r_sum.to_string(),
            String::new(),
            "best".into(),
        ]);
        let mut points = Vec::new();
        for cmp in &result.comparisons {
            table.push(vec![
                ctx.tth.interval_start(cmp.week).to_string(),
                cmp.r_sum.to_string(),
                cmp.test.p_value.to_string(),
                cmp.significant.to_string(),
            ]);
            points.push((
                ctx.tth.interval_start(cmp.week).to_string(),
                cmp.r_sum.to_string(),
            ));
        }
        Ok(RecipeOutput {
            table,
            plots: vec![PlotSeries {
                name: "rsum".into(),
                points,
            }],
        })
    }
}

struct Trendy;

impl Recipe for Trendy {
    fn name(&self) -> &'static str {
        "trendy"
    }

    fn run(&self, ctx: &RecipeContext) -> Result<RecipeOutput> {
        // Default window: the histogram's own span (an explicit --window
        // keeps runs reproducible, unlike a wall-clock anchor).
        let (start, end) = match ctx.params.window {
            Some(w) => w,
            None => {
                let Some((lo, hi)) = ctx.tth.interval_span() else {
                    return Ok(RecipeOutput {
                        table: Table::new(vec!["term", "max_slope", "edge", "docs"]),
                        plots: Vec::new(),
                    });
                };
                (
                    ctx.tth.interval_start(lo),
                    ctx.tth.grid().interval_end(hi),
                )
            }
        };
        let hits = analytics::trendy_terms(ctx.tth, start, end, ctx.params.theta, ctx.params.width)?;

        let mut table = Table::new(vec!["term", "max_slope", "edge", "docs"]);
        let mut plots = Vec::new();
        for hit in &hits {
            table.push(vec![
                ctx.tth.vocab().term(hit.term).unwrap_or("<unknown>").to_string(),
                hit.max_slope.to_string(),
                format!("{}->{}", hit.edge.0, hit.edge.1),
                hit.docs
                    .iter()
                    .map(|d| d.to_string())
                    .collect::<Vec<_>>()
                    .join(";"),
            ]);
            plots.push(term_series(ctx.tth, hit.term));
        }
        Ok(RecipeOutput { table, plots })
    }
}

struct Sync;

impl Recipe for Sync {
    fn name(&self) -> &'static str {
        "sync"
    }

    fn run(&self, ctx: &RecipeContext) -> Result<RecipeOutput> {
        let var = ctx.params.group_by.as_deref().ok_or_else(|| {
            TthError::Argument("sync needs --group-by naming the partition attribute".into())
        })?;
        let parts = algebra::group(ctx.tth, &[var.to_string()])?;
        let days = analytics::synchronized_topics(&parts, ctx.params.k, ctx.params.jaccard)?;

        let mut table = Table::new(vec!["day", "groups"]);
        for day in &days {
            let groups = day
                .groups
                .iter()
                .map(|g| {
                    g.iter()
                        .map(|k| k.join("/"))
                        .collect::<Vec<_>>()
                        .join("+")
                })
                .collect::<Vec<_>>()
                .join(" | ");
            table.push(vec![ctx.tth.interval_start(day.interval).to_string(), groups]);
        }
        Ok(RecipeOutput {
            table,
            plots: Vec::new(),
        })
    }
}

struct TfIdf;

impl Recipe for TfIdf {
    fn name(&self) -> &'static str {
        "tfidf"
    }

    fn run(&self, ctx: &RecipeContext) -> Result<RecipeOutput> {
        let entries = analytics::tf_idf(ctx.tth, ctx.params.k)?;
        let mut table = Table::new(vec!["rank", "term", "range_start", "tf_idf"]);
        for e in &entries {
            table.push(vec![
                e.rank.to_string(),
                ctx.tth.vocab().term(e.term).unwrap_or("<unknown>").to_string(),
                ctx.tth.interval_start(e.interval).to_string(),
                e.score.to_string(),
            ]);
        }
        Ok(RecipeOutput {
            table,
            plots: Vec::new(),
        })
    }
}

struct Distance;

impl Recipe for Distance {
    fn name(&self) -> &'static str {
        "distance"
    }

    fn run(&self, ctx: &RecipeContext) -> Result<RecipeOutput> {
        let other = ctx.other.ok_or_else(|| {
            TthError::Argument("distance needs --other with a second snapshot".into())
        })?;
        let registry = DistanceRegistry::builtin();
        let value = algebra::distance(ctx.tth, other, &registry, &ctx.params.metric)?;
        let mut table = Table::new(vec!["metric", "distance"]);
        table.push(vec![ctx.params.metric.clone(), value.to_string()]);
        Ok(RecipeOutput {
            table,
            plots: Vec::new(),
        })
    }
}
