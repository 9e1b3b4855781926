//! Streams compared word for word against a reference ChaCha8 keystream
//! computed outside this crate.

use disintegration::rng::StreamKey;

struct Row {
    key: StreamKey,
    index: usize,
    word: u64,
    uniform: f64,
}

fn golden() -> Vec<Row> {
    include_str!("golden/chacha8_streams.txt")
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| {
            let f: Vec<&str> = l.split_whitespace().collect();
            Row {
                key: StreamKey::new(f[0].parse().unwrap(), f[1].parse().unwrap())
                    .with_substream(f[2].parse().unwrap()),
                index: f[3].parse().unwrap(),
                word: f[4].parse().unwrap(),
                uniform: f[5].parse().unwrap(),
            }
        })
        .collect()
}

#[test]
fn words_match_reference_keystream() {
    let rows = golden();
    assert_eq!(rows.len(), 80);
    let mut current = None;
    let mut stream = rows[0].key.stream();
    for row in &rows {
        if current != Some(row.key) {
            current = Some(row.key);
            stream = row.key.stream();
        }
        assert_eq!(
            stream.next_u64(),
            row.word,
            "{:?} index {}",
            row.key,
            row.index
        );
    }
}

#[test]
fn uniforms_match_reference_keystream() {
    let rows = golden();
    let mut current = None;
    let mut stream = rows[0].key.stream();
    for row in &rows {
        if current != Some(row.key) {
            current = Some(row.key);
            stream = row.key.stream();
        }
        assert_eq!(
            stream.next_uniform(),
            row.uniform,
            "{:?} index {}",
            row.key,
            row.index
        );
    }
}
