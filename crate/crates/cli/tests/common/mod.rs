//! Shared test support: a seeded Adult-format data generator and numeric
//! helpers used by the integration and acceptance suites.

#![allow(dead_code)]

pub mod reference;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const WORKCLASS: &[&str] = &[
    "Private",
    "Self-emp-not-inc",
    "Self-emp-inc",
    "Local-gov",
    "State-gov",
    "Federal-gov",
    "Without-pay",
];
const EDUCATION: &[(&str, u32)] = &[
    ("Preschool", 1),
    ("5th-6th", 3),
    ("7th-8th", 4),
    ("9th", 5),
    ("10th", 6),
    ("11th", 7),
    ("12th", 8),
    ("HS-grad", 9),
    ("Some-college", 10),
    ("Assoc-voc", 11),
    ("Assoc-acdm", 12),
    ("Bachelors", 13),
    ("Masters", 14),
    ("Prof-school", 15),
    ("Doctorate", 16),
];
const MARITAL: &[&str] = &[
    "Married-civ-spouse",
    "Never-married",
    "Divorced",
    "Separated",
    "Widowed",
    "Married-spouse-absent",
];
const OCCUPATION: &[&str] = &[
    "Exec-managerial",
    "Prof-specialty",
    "Tech-support",
    "Sales",
    "Adm-clerical",
    "Craft-repair",
    "Machine-op-inspct",
    "Transport-moving",
    "Handlers-cleaners",
    "Farming-fishing",
    "Other-service",
    "Protective-serv",
    "Priv-house-serv",
];
const RELATIONSHIP: &[&str] = &[
    "Husband",
    "Wife",
    "Not-in-family",
    "Own-child",
    "Unmarried",
    "Other-relative",
];
const RACE: &[&str] = &["White", "Black", "Asian-Pac-Islander", "Amer-Indian-Eskimo", "Other"];
const COUNTRY: &[&str] = &[
    "United-States",
    "Mexico",
    "Philippines",
    "Germany",
    "Canada",
    "Puerto-Rico",
    "El-Salvador",
    "India",
    "Cuba",
    "England",
    "China",
    "Jamaica",
    "Italy",
    "South",
    "Japan",
    "Vietnam",
    "Guatemala",
    "Poland",
    "Columbia",
    "Haiti",
];

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Generate Adult-format CSV text: census-style attribute rows with a
/// binary income label that depends log-linearly on the encodable features,
/// plus a sprinkling of `?` missing markers.
pub fn generate_adult_csv(rows: usize, seed: u64) -> String {
    generate_adult_csv_scaled(rows, seed, 0.45)
}

/// `score_scale` shrinks the logistic score toward 0, moving label
/// probabilities toward a coin flip: smaller values mean a noisier, harder
/// classification problem.
pub fn generate_adult_csv_scaled(rows: usize, seed: u64, score_scale: f64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = String::with_capacity(rows * 96);
    for _ in 0..rows {
        let age: u32 = rng.random_range(17..=75);
        let workclass = WORKCLASS[rng.random_range(0..WORKCLASS.len())];
        let fnlwgt: u32 = rng.random_range(20_000..500_000);
        let (education, education_num) = EDUCATION[rng.random_range(0..EDUCATION.len())];
        let marital = MARITAL[rng.random_range(0..MARITAL.len())];
        let occupation_index = rng.random_range(0..OCCUPATION.len());
        let occupation = OCCUPATION[occupation_index];
        let relationship = if marital == "Married-civ-spouse" {
            if rng.random_bool(0.55) {
                "Husband"
            } else {
                "Wife"
            }
        } else {
            RELATIONSHIP[2 + rng.random_range(0..RELATIONSHIP.len() - 2)]
        };
        let race = RACE[rng.random_range(0..RACE.len())];
        let sex = if rng.random_bool(0.6) { "Male" } else { "Female" };
        let capital_gain: u32 = if rng.random_bool(0.08) {
            rng.random_range(1_000..20_000)
        } else {
            0
        };
        let capital_loss: u32 = if rng.random_bool(0.04) {
            rng.random_range(500..3_000)
        } else {
            0
        };
        let hours: u32 = rng.random_range(20..=70);

        let married = (marital == "Married-civ-spouse") as i32 as f64;
        let high_occ = (occupation_index < 4) as i32 as f64;
        let score = 0.045 * (age as f64 - 38.0)
            + 0.33 * (education_num as f64 - 10.0)
            + 1.25 * married
            + 0.85 * high_occ
            + 0.02 * (hours as f64 - 40.0)
            + 2.0 * ((capital_gain > 0) as i32 as f64)
            + 0.35 * ((sex == "Male") as i32 as f64)
            - 1.6;
        let label = if rng.random_bool(sigmoid(score_scale * score)) {
            ">50K"
        } else {
            "<=50K"
        };

        // occasional missing markers, like the published file
        let workclass = if rng.random_bool(0.015) { "?" } else { workclass };
        let occupation = if rng.random_bool(0.015) { "?" } else { occupation };
        let country = if rng.random_bool(0.01) {
            "?"
        } else {
            COUNTRY[rng.random_range(0..COUNTRY.len())]
        };

        out.push_str(&format!(
            "{age}, {workclass}, {fnlwgt}, {education}, {education_num}, {marital}, \
             {occupation}, {relationship}, {race}, {sex}, {capital_gain}, {capital_loss}, \
             {hours}, {country}, {label}\n"
        ));
    }
    out
}

/// Generate Adult-format CSV text with a bimodal signal: a minority of
/// clearly high-income profiles next to a majority of ambiguous rows whose
/// label is a near-coin-flip with a weak learnable tilt.
pub fn generate_adult_csv_bimodal(rows: usize, seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = String::with_capacity(rows * 96);
    for _ in 0..rows {
        let age: u32 = rng.random_range(17..=75);
        let workclass = WORKCLASS[rng.random_range(0..WORKCLASS.len())];
        let fnlwgt: u32 = rng.random_range(20_000..500_000);
        let (education, education_num) = EDUCATION[rng.random_range(0..EDUCATION.len())];
        let marital = MARITAL[rng.random_range(0..MARITAL.len())];
        let occupation_index = rng.random_range(0..OCCUPATION.len());
        let occupation = OCCUPATION[occupation_index];
        let relationship = if marital == "Married-civ-spouse" {
            if rng.random_bool(0.55) {
                "Husband"
            } else {
                "Wife"
            }
        } else {
            RELATIONSHIP[2 + rng.random_range(0..RELATIONSHIP.len() - 2)]
        };
        let race = RACE[rng.random_range(0..RACE.len())];
        let sex = if rng.random_bool(0.6) { "Male" } else { "Female" };
        let capital_gain: u32 = if rng.random_bool(0.08) {
            rng.random_range(1_000..20_000)
        } else {
            0
        };
        let capital_loss: u32 = if rng.random_bool(0.04) {
            rng.random_range(500..3_000)
        } else {
            0
        };
        let hours: u32 = rng.random_range(20..=70);

        // One globally dominant outcome with a context-dependent margin:
        // the high-income label is always the better guess, but how much
        // better varies from a near-coin-flip to a sure thing.
        let z = 0.03 * (age as f64 - 46.0)
            + 0.22 * (education_num as f64 - 8.5)
            + 0.03 * (hours as f64 - 45.0)
            + 1.4 * ((capital_gain > 0) as i32 as f64)
            + 0.9 * ((occupation_index < 4) as i32 as f64)
            - 0.8;
        let p = 0.53 + 0.22 * sigmoid(1.2 * z);
        let label = if rng.random_bool(p) { ">50K" } else { "<=50K" };

        let workclass = if rng.random_bool(0.015) { "?" } else { workclass };
        let occupation = if rng.random_bool(0.015) { "?" } else { occupation };
        let country = if rng.random_bool(0.01) {
            "?"
        } else {
            COUNTRY[rng.random_range(0..COUNTRY.len())]
        };

        out.push_str(&format!(
            "{age}, {workclass}, {fnlwgt}, {education}, {education_num}, {marital}, \
             {occupation}, {relationship}, {race}, {sex}, {capital_gain}, {capital_loss}, \
             {hours}, {country}, {label}\n"
        ));
    }
    out
}

/// Write a generated dataset under a temp dir and return its path.
pub fn write_adult_file(dir: &std::path::Path, rows: usize, seed: u64) -> std::path::PathBuf {
    let path = dir.join(format!("adult_gen_{rows}_{seed}.csv"));
    std::fs::write(&path, generate_adult_csv(rows, seed)).expect("write dataset");
    path
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

pub fn median(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}
