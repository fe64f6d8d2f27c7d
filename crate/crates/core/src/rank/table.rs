//! Ratings tables (rater x document x method grids of utility categories) and score accumulation.

use std::fmt;
use std::io::Read;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rank::methods::ScoreMatrix;

/// Utility categories, best first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Category {
    X,
    A,
    B,
    N,
}

impl Category {
    pub const ALL: [Category; 4] = [Category::X, Category::A, Category::B, Category::N];

    pub fn symbol(self) -> &'static str {
        match self {
            Category::X => "X",
            Category::A => "A",
            Category::B => "B",
            Category::N => "N",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Category::X => "Exclusive",
            Category::A => "Primary use",
            Category::B => "Secondary use",
            Category::N => "No use",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

impl FromStr for Category {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "X" | "x" => Ok(Category::X),
            "A" | "a" => Ok(Category::A),
            "B" | "b" => Ok(Category::B),
            "N" | "n" => Ok(Category::N),
            other => Err(Error::UnknownCategory {
                symbol: other.to_string(),
                cell: "input".into(),
            }),
        }
    }
}

/// Numeric values of the categories; equally spaced by default.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoryScale {
    pub x: u32,
    pub a: u32,
    pub b: u32,
    pub n: u32,
}

impl Default for CategoryScale {
    fn default() -> Self {
        CategoryScale { x: 4, a: 3, b: 2, n: 1 }
    }
}

impl CategoryScale {
    pub fn value(&self, c: Category) -> u32 {
        match c {
            Category::X => self.x,
            Category::A => self.a,
            Category::B => self.b,
            Category::N => self.n,
        }
    }

    /// Category whose value is nearest to `v` (ties go to the better category).
    pub fn nearest(&self, v: f64) -> Category {
        Category::ALL
            .into_iter()
            .min_by(|&p, &q| {
                let dp = (self.value(p) as f64 - v).abs();
                let dq = (self.value(q) as f64 - v).abs();
                dp.total_cmp(&dq)
            })
            .expect("four categories")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Scope {
    #[default]
    Overall,
    PerRater,
    PerDocument,
}

impl Scope {
    pub fn as_str(self) -> &'static str {
        match self {
            Scope::Overall => "overall",
            Scope::PerRater => "per-rater",
            Scope::PerDocument => "per-document",
        }
    }
}

impl fmt::Display for Scope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scope {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "overall" => Ok(Scope::Overall),
            "per-rater" => Ok(Scope::PerRater),
            "per-document" => Ok(Scope::PerDocument),
            other => Err(Error::invalid(format!(
                "unknown scope `{other}` (expected overall, per-rater or per-document)"
            ))),
        }
    }
}

/// One rating, as read from CSV or submitted to the service.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RatingRecord {
    pub rater: String,
    pub document: String,
    pub method: String,
    pub category: Category,
}

/// Dense rater x document x method grid. Cells may be empty until validated.
#[derive(Debug, Clone, PartialEq)]
pub struct RatingsTable {
    raters: Vec<String>,
    documents: Vec<String>,
    methods: Vec<String>,
    cells: Vec<Option<Category>>,
}

fn position_or_push(ids: &mut Vec<String>, id: &str) -> usize {
    ids.iter().position(|x| x == id).unwrap_or_else(|| {
        ids.push(id.to_string());
        ids.len() - 1
    })
}

impl RatingsTable {
    pub fn new(raters: Vec<String>, documents: Vec<String>, methods: Vec<String>) -> Self {
        let len = raters.len() * documents.len() * methods.len();
        RatingsTable {
            raters,
            documents,
            methods,
            cells: vec![None; len],
        }
    }

    /// Builds a table whose axes list ids in order of first appearance.
    /// Later records for the same cell replace earlier ones.
    pub fn from_records<'a>(records: impl IntoIterator<Item = &'a RatingRecord>) -> Self {
        let records: Vec<&RatingRecord> = records.into_iter().collect();
        let (mut raters, mut documents, mut methods) = (Vec::new(), Vec::new(), Vec::new());
        for r in &records {
            position_or_push(&mut raters, &r.rater);
            position_or_push(&mut documents, &r.document);
            position_or_push(&mut methods, &r.method);
        }
        let mut table = RatingsTable::new(raters, documents, methods);
        for r in records {
            table
                .set(&r.rater, &r.document, &r.method, r.category)
                .expect("axes cover every record");
        }
        table
    }

    pub fn raters(&self) -> &[String] {
        &self.raters
    }

    pub fn documents(&self) -> &[String] {
        &self.documents
    }

    pub fn methods(&self) -> &[String] {
        &self.methods
    }

    fn index(&self, r: usize, d: usize, m: usize) -> usize {
        (r * self.documents.len() + d) * self.methods.len() + m
    }

    fn locate(&self, rater: &str, document: &str, method: &str) -> Result<usize> {
        let find = |ids: &[String], id: &str, field: &str| {
            ids.iter()
                .position(|x| x == id)
                .ok_or_else(|| Error::invalid(format!("unknown {field} `{id}`")))
        };
        let r = find(&self.raters, rater, "rater")?;
        let d = find(&self.documents, document, "document")?;
        let m = find(&self.methods, method, "method")?;
        Ok(self.index(r, d, m))
    }

    /// Sets a cell and returns its previous value.
    pub fn set(&mut self, rater: &str, document: &str, method: &str, c: Category) -> Result<Option<Category>> {
        let i = self.locate(rater, document, method)?;
        Ok(self.cells[i].replace(c))
    }

    pub fn get(&self, rater: &str, document: &str, method: &str) -> Result<Option<Category>> {
        Ok(self.cells[self.locate(rater, document, method)?])
    }

    fn cell(&self, r: usize, d: usize, m: usize) -> Option<Category> {
        self.cells[self.index(r, d, m)]
    }

    fn cell_name(&self, r: usize, d: usize, m: usize) -> String {
        format!("{}/{}/{}", self.raters[r], self.documents[d], self.methods[m])
    }

    /// Empty cells as `rater/document/method`.
    pub fn missing_cells(&self) -> Vec<String> {
        let mut out = Vec::new();
        for r in 0..self.raters.len() {
            for d in 0..self.documents.len() {
                for m in 0..self.methods.len() {
                    if self.cell(r, d, m).is_none() {
                        out.push(self.cell_name(r, d, m));
                    }
                }
            }
        }
        out
    }

    /// Fills empty cells with `c` and returns how many were filled.
    pub fn fill_missing(&mut self, c: Category) -> usize {
        let mut count = 0;
        for cell in self.cells.iter_mut().filter(|x| x.is_none()) {
            *cell = Some(c);
            count += 1;
        }
        count
    }

    pub fn validate(&self) -> Result<()> {
        if self.methods.is_empty() {
            return Err(Error::EmptyInput("ratings table lists no methods"));
        }
        if self.raters.is_empty() || self.documents.is_empty() {
            return Err(Error::EmptyInput("ratings table has no ratings"));
        }
        let missing = self.missing_cells();
        if !missing.is_empty() {
            return Err(Error::IncompleteTable { missing });
        }
        Ok(())
    }

    /// `(label, [(rater, document)])` groups for a scope.
    fn groups(&self, scope: Scope) -> Vec<(String, Vec<(usize, usize)>)> {
        let all = |r_filter: Option<usize>, d_filter: Option<usize>| {
            let mut v = Vec::new();
            for r in 0..self.raters.len() {
                for d in 0..self.documents.len() {
                    if r_filter.is_none_or(|x| x == r) && d_filter.is_none_or(|x| x == d) {
                        v.push((r, d));
                    }
                }
            }
            v
        };
        match scope {
            Scope::Overall => vec![("overall".to_string(), all(None, None))],
            Scope::PerRater => (0..self.raters.len())
                .map(|r| (self.raters[r].clone(), all(Some(r), None)))
                .collect(),
            Scope::PerDocument => (0..self.documents.len())
                .map(|d| (self.documents[d].clone(), all(None, Some(d))))
                .collect(),
        }
    }

    /// Category values per method within each scope group, for Majority Judgment.
    pub fn category_values(&self, scope: Scope, scale: &CategoryScale) -> Result<Vec<Scoped<Vec<Vec<u32>>>>> {
        self.validate()?;
        Ok(self
            .groups(scope)
            .into_iter()
            .map(|(label, cells)| Scoped {
                label,
                value: (0..self.methods.len())
                    .map(|m| {
                        cells
                            .iter()
                            .map(|&(r, d)| scale.value(self.cell(r, d, m).expect("validated")))
                            .collect()
                    })
                    .collect(),
            })
            .collect())
    }

    /// Category counts `[X, A, B, N]` per method within a scope group label.
    pub fn category_counts(&self, scope: Scope) -> Vec<Scoped<Vec<[usize; 4]>>> {
        self.groups(scope)
            .into_iter()
            .map(|(label, cells)| {
                let counts = (0..self.methods.len())
                    .map(|m| {
                        let mut c = [0usize; 4];
                        for &(r, d) in &cells {
                            if let Some(cat) = self.cell(r, d, m) {
                                c[cat as usize] += 1;
                            }
                        }
                        c
                    })
                    .collect();
                Scoped { label, value: counts }
            })
            .collect()
    }
}

/// A value computed for one scope group (`overall`, a rater id, or a document id).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Scoped<T> {
    pub label: String,
    pub value: T,
}

/// Accumulates `S_ij += s_i` (`i != j`) over every (rater, document) in each scope group.
pub fn ratings_to_scores(
    table: &RatingsTable,
    scope: Scope,
    scale: &CategoryScale,
) -> Result<Vec<Scoped<ScoreMatrix>>> {
    table.validate()?;
    let n = table.methods.len();
    Ok(table
        .groups(scope)
        .into_iter()
        .map(|(label, cells)| {
            let mut s = ScoreMatrix::zeros(n);
            for &(r, d) in &cells {
                for m in 0..n {
                    let c = table.cell(r, d, m).expect("validated");
                    s.add_row_score(m, scale.value(c) as f64);
                }
            }
            Scoped { label, value: s }
        })
        .collect())
}

const CSV_HEADER: [&str; 4] = ["rater", "document", "method", "category"];

#[derive(Deserialize)]
struct CsvRow {
    rater: String,
    document: String,
    method: String,
    category: String,
}

/// Reads `rater,document,method,category` rows. Duplicate cells and unknown
/// categories are errors naming the offending cell.
pub fn read_ratings_csv(reader: impl Read) -> Result<RatingsTable> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if header != CSV_HEADER {
        return Err(Error::invalid(format!(
            "ratings CSV header must be `{}`, found `{}`",
            CSV_HEADER.join(","),
            header.join(",")
        )));
    }
    let mut records = Vec::new();
    for (line, row) in rdr.deserialize::<CsvRow>().enumerate() {
        let row = row?;
        let cell = format!("line {} ({}/{}/{})", line + 2, row.rater, row.document, row.method);
        let category = row.category.parse::<Category>().map_err(|_| Error::UnknownCategory {
            symbol: row.category.clone(),
            cell: cell.clone(),
        })?;
        if records
            .iter()
            .any(|r: &RatingRecord| r.rater == row.rater && r.document == row.document && r.method == row.method)
        {
            return Err(Error::invalid(format!("duplicate rating at {cell}")));
        }
        records.push(RatingRecord {
            rater: row.rater,
            document: row.document,
            method: row.method,
            category,
        });
    }
    Ok(RatingsTable::from_records(&records))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(r: &str, d: &str, m: &str, c: Category) -> RatingRecord {
        RatingRecord {
            rater: r.into(),
            document: d.into(),
            method: m.into(),
            category: c,
        }
    }

    #[test]
    fn single_cell_scores() {
        let t = RatingsTable::from_records(&[rec("r", "d", "m1", Category::A), rec("r", "d", "m2", Category::N)]);
        let s = ratings_to_scores(&t, Scope::Overall, &CategoryScale::default()).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].value, ScoreMatrix::from_rows(&[vec![0.0, 3.0], vec![1.0, 0.0]]).unwrap());
    }

    #[test]
    fn per_rater_sums_to_overall() {
        let mut recs = Vec::new();
        for (r, cats) in [("p", [Category::X, Category::B, Category::N]), ("q", [Category::A, Category::A, Category::B])] {
            for (d, shift) in [("d1", 0), ("d2", 1)] {
                for (m, name) in ["m1", "m2", "m3"].iter().enumerate() {
                    recs.push(rec(r, d, name, cats[(m + shift) % 3]));
                }
            }
        }
        let t = RatingsTable::from_records(&recs);
        let scale = CategoryScale::default();
        let overall = ratings_to_scores(&t, Scope::Overall, &scale).unwrap().remove(0).value;
        let per = ratings_to_scores(&t, Scope::PerRater, &scale).unwrap();
        assert_eq!(per.iter().map(|s| s.label.as_str()).collect::<Vec<_>>(), ["p", "q"]);
        let mut sum = ScoreMatrix::zeros(3);
        for s in &per {
            sum.add_assign(&s.value).unwrap();
        }
        assert_eq!(sum, overall);
        assert_eq!(ratings_to_scores(&t, Scope::PerDocument, &scale).unwrap().len(), 2);
    }

    #[test]
    fn empty_and_incomplete_tables_fail() {
        let t = RatingsTable::new(vec!["r".into()], vec!["d".into()], vec![]);
        assert!(ratings_to_scores(&t, Scope::Overall, &CategoryScale::default()).is_err());
        let mut t = RatingsTable::new(vec!["r".into()], vec!["d".into()], vec!["a".into(), "b".into()]);
        t.set("r", "d", "a", Category::X).unwrap();
        match t.validate() {
            Err(Error::IncompleteTable { missing }) => assert_eq!(missing, vec!["r/d/b".to_string()]),
            other => panic!("{other:?}"),
        }
        assert_eq!(t.fill_missing(Category::N), 1);
        assert_eq!(t.get("r", "d", "b").unwrap(), Some(Category::N));
    }

    #[test]
    fn csv_parsing() {
        let csv = "rater,document,method,category\nr1,d1,vividness,A\nr1,d1,histeq, n\n";
        let t = read_ratings_csv(csv.as_bytes()).unwrap();
        assert_eq!(t.methods(), ["vividness", "histeq"]);
        assert_eq!(t.get("r1", "d1", "histeq").unwrap(), Some(Category::N));

        let bad = "rater,document,method,category\nr1,d1,lsv,Q\n";
        match read_ratings_csv(bad.as_bytes()) {
            Err(Error::UnknownCategory { symbol, cell }) => {
                assert_eq!(symbol, "Q");
                assert!(cell.contains("r1/d1/lsv"), "{cell}");
            }
            other => panic!("{other:?}"),
        }
        assert!(read_ratings_csv("a,b,c,d\n".as_bytes()).is_err());
        let dup = "rater,document,method,category\nr,d,m,A\nr,d,m,B\n";
        assert!(read_ratings_csv(dup.as_bytes()).is_err());
    }

    #[test]
    fn nearest_category() {
        let s = CategoryScale::default();
        assert_eq!(s.nearest(2.37), Category::B);
        assert_eq!(s.nearest(1.48), Category::N);
        assert_eq!(s.nearest(3.5), Category::X);
        assert_eq!(s.nearest(9.0), Category::X);
    }

    #[test]
    fn scope_names() {
        for s in [Scope::Overall, Scope::PerRater, Scope::PerDocument] {
            assert_eq!(s.as_str().parse::<Scope>().unwrap(), s);
        }
        assert!("everything".parse::<Scope>().is_err());
    }
}
