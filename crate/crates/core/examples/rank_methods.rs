// Centroids, ROD, Majority Judgment and their Kemenized ensemble on a small
// ratings table, printed in the same layout as the `rank` subcommand.

use legibility::rank::{read_ratings_csv, MajorityValue, Scope};
use legibility::report::{rank_table, RankMethod, ReportOptions};

const RATINGS: &str = "\
rater,document,method,category
ann,recto,original,B
ann,recto,vividness,X
ann,recto,lsv,A
ann,recto,retinex,N
bob,recto,original,N
bob,recto,vividness,A
bob,recto,lsv,A
bob,recto,retinex,B
cy,recto,original,B
cy,recto,vividness,X
cy,recto,lsv,B
cy,recto,retinex,N
";

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    // The majority value of five grades: successive lower medians, two digits each.
    let mv = MajorityValue::new(&[7, 9, 9, 11, 11])?;
    println!("majority value of {{7, 9, 9, 11, 11}} = {mv}\n");

    let table = read_ratings_csv(RATINGS.as_bytes())?;
    table.validate()?;
    for method in RankMethod::ALL {
        for report in rank_table(&table, method, Scope::Overall, &ReportOptions::default())? {
            println!("{}", report.to_text());
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("rank_methods");
}
