use proptest::prelude::*;
use rulelist::dataset::{
    load_csv, write_csv, AttributeKind, AttributeSchema, CategoricalDataset, LoadOptions,
};

const WORDS: [&str; 6] = ["a", "b c", "x,y", "say \"hi\"", "7", "é"];

fn decoded(ds: &CategoricalDataset) -> Vec<Vec<String>> {
    (0..ds.n_rows())
        .map(|i| {
            let mut row: Vec<String> = ds
                .row(i)
                .iter()
                .zip(ds.schemas())
                .map(|(&v, s)| s.categories[v as usize].clone())
                .collect();
            row.push(ds.label_names()[ds.labels()[i] as usize].clone());
            row
        })
        .collect()
}

fn table() -> impl Strategy<Value = (usize, Vec<Vec<usize>>)> {
    (1usize..5, 2usize..30).prop_flat_map(|(p, n)| {
        (
            Just(p),
            prop::collection::vec(prop::collection::vec(0usize..WORDS.len(), p + 1), n),
        )
    })
}

fn build(p: usize, cells: &[Vec<usize>]) -> Option<CategoricalDataset> {
    let column = |j: usize| -> Vec<String> {
        let mut seen: Vec<String> = Vec::new();
        for row in cells {
            let w = WORDS[row[j]].to_string();
            if !seen.contains(&w) {
                seen.push(w);
            }
        }
        seen
    };
    let cats: Vec<Vec<String>> = (0..=p).map(column).collect();
    if cats.iter().any(|c| c.len() < 2) {
        return None;
    }
    let schemas = (0..p)
        .map(|a| AttributeSchema {
            name: format!("col {a}"),
            categories: cats[a].clone(),
            kind: AttributeKind::Categorical,
        })
        .collect();
    let index = |j: usize, w: usize| cats[j].iter().position(|c| c == WORDS[w]).unwrap() as u32;
    let x = cells
        .iter()
        .flat_map(|r| (0..p).map(move |a| index(a, r[a])))
        .collect();
    let y = cells.iter().map(|r| index(p, r[p])).collect();
    CategoricalDataset::new(schemas, "target", cats[p].clone(), x, y).ok()
}

proptest! {
    #[test]
    fn written_files_load_back_to_the_same_cells((p, cells) in table()) {
        let Some(ds) = build(p, &cells) else { return Ok(()); };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("data.csv");
        write_csv(&ds, &path).unwrap();
        let back = load_csv(&path, &LoadOptions::new("target")).unwrap();
        prop_assert_eq!(back.n_rows(), ds.n_rows());
        prop_assert_eq!(decoded(&back), decoded(&ds));
    }
}
