mod support;

use std::collections::HashMap;
use std::io::BufReader;
use std::time::Duration;

use proptest::prelude::*;
use support::oracles::match_entities_bruteforce;
use texttiger_core::stub::{StubResponse, StubServer};
use texttiger_core::tokenizer::{TokenCount, Vocabulary};
use texttiger_core::wikipedia::{EntitySource, FetchError, WikipediaClient, WikipediaConfig};
use texttiger_core::witcub::{
    build_dataset, load_dataset, match_entities, save_dataset, BuildOptions, Dataset, DatasetError, DatasetStats,
    EntityEntry, HttpImageProbe, ImageProbe, WitCubInstance, WitRow,
};

fn entity(name: &str) -> EntityEntry {
    EntityEntry {
        name: name.into(),
        description: format!("{name} is a notable place."),
        source_url: format!("https://en.wikipedia.org/wiki/{}", name.replace(' ', "_")),
    }
}

fn synthetic(n: usize) -> Dataset {
    let names = ["River Nore", "Kilkenny Castle", "Phahurat Road", "Wat Pho", "Grand Palace", "Chao Phraya"];
    let instances = (0..n)
        .map(|i| {
            let ents: Vec<EntityEntry> = (0..=(i % 3)).map(|k| entity(names[(i + k) % names.len()])).collect();
            let caption = format!("View {i} of {} at dusk", ents[0].name);
            WitCubInstance {
                id: format!("{:06}", i + 1),
                caption_token_count: Vocabulary::clip().count_tokens(&caption),
                caption,
                image_ref: format!("https://upload.wikimedia.org/img/{i}.jpg"),
                entities: ents,
            }
        })
        .collect();
    Dataset::new(instances)
}

#[test]
fn ten_instance_round_trip() {
    let ds = synthetic(10);
    let mut buf = Vec::new();
    save_dataset(&ds, &mut buf).unwrap();
    let back = load_dataset(BufReader::new(buf.as_slice())).unwrap();
    assert_eq!(back, ds);
    assert_eq!(back.stats(), DatasetStats::compute(ds.instances()));
    assert_eq!(back.stats().instance_count, 10);
    // 10 instances with 1,2,3,1,2,3,... entities.
    assert_eq!(back.stats().mean_entities_per_instance, 19.0 / 10.0);

    let mut again = Vec::new();
    save_dataset(&back, &mut again).unwrap();
    assert_eq!(again, buf);
}

#[test]
fn tampering_is_detected() {
    let mut buf = Vec::new();
    save_dataset(&synthetic(3), &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();

    let truncated: String = text.lines().take(3).map(|l| format!("{l}\n")).collect();
    assert!(matches!(load_dataset(truncated.as_bytes()), Err(DatasetError::Parse { .. })));

    let lines: Vec<String> = text.lines().map(str::to_string).collect();
    let mut inst: WitCubInstance = serde_json::from_str(&lines[1]).unwrap();
    inst.caption_token_count = TokenCount::new(inst.caption_token_count.get() + 1);
    let tampered = format!("{}\n{}\n{}\n{}\n", lines[0], serde_json::to_string(&inst).unwrap(), lines[2], lines[3]);
    assert!(matches!(load_dataset(tampered.as_bytes()), Err(DatasetError::StatsMismatch { .. })));

    let versioned = text.replacen("\"version\":1", "\"version\":9", 1);
    assert!(matches!(load_dataset(versioned.as_bytes()), Err(DatasetError::Version { found: 9, .. })));
}

#[test]
fn matching_agrees_with_bruteforce_on_fixed_cases() {
    let cases: &[(&str, &[&str])] = &[
        ("The River Nore flows past Kilkenny Castle.", &["Kilkenny Castle", "River Nore", "Nore"]),
        ("Noreen met nobody at the castle", &["Nore", "Castle"]),
        ("Wat Pho and wat pho again", &["wat pho", "Wat Pho"]),
        ("Bridge over the Nore (river) today", &["Nore (river)", "Bridge"]),
        ("São Paulo skyline", &["São Paulo", "Paulo"]),
    ];
    for (caption, names) in cases {
        let entries: Vec<EntityEntry> = names.iter().map(|n| entity(n)).collect();
        let names: Vec<String> = names.iter().map(|s| s.to_string()).collect();
        let got: Vec<String> = match_entities(caption, &entries).into_iter().map(|e| e.name).collect();
        let want: Vec<String> =
            match_entities_bruteforce(caption, &names).into_iter().map(|i| names[i].clone()).collect();
        assert_eq!(got, want, "{caption}");
    }
}

/// Entity source backed by a map; counts lookups per reference.
struct MapSource {
    known: HashMap<String, EntityEntry>,
    calls: std::sync::Mutex<HashMap<String, usize>>,
}

impl EntitySource for MapSource {
    fn fetch_entity(&self, reference: &str) -> Result<EntityEntry, FetchError> {
        *self.calls.lock().unwrap().entry(reference.to_string()).or_default() += 1;
        self.known.get(reference).cloned().ok_or_else(|| FetchError::NotFound(reference.to_string()))
    }
}

struct AllowList(Vec<String>);

impl ImageProbe for AllowList {
    fn check(&self, image_ref: &str) -> Result<(), String> {
        if self.0.iter().any(|s| s == image_ref) {
            Ok(())
        } else {
            Err("gone".into())
        }
    }
}

#[test]
fn build_filters_and_preserves_order() {
    let source = MapSource {
        known: ["Nore", "Castle"].iter().map(|n| (format!("ref:{n}"), entity(n))).collect(),
        calls: Default::default(),
    };
    let rows: Vec<WitRow> = (0..12)
        .map(|i| WitRow {
            id: None,
            caption: format!("Caption {i} near the Nore"),
            image_ref: format!("img{i}"),
            entity_urls: if i % 4 == 3 {
                vec!["ref:Missing".into()]
            } else {
                vec!["ref:Nore".into(), "ref:Castle".into()]
            },
        })
        .collect();
    let probe = AllowList((0..12).filter(|i| i % 5 != 0).map(|i| format!("img{i}")).collect());
    let out = build_dataset(rows, &source, &probe, Vocabulary::clip(), BuildOptions { parallel: 4 }).unwrap();

    let kept: Vec<&str> = out.dataset.instances().iter().map(|i| i.id.as_str()).collect();
    assert_eq!(kept, ["000002", "000003", "000005", "000007", "000009", "000010"]);
    assert_eq!(out.dropped.len(), 6);
    for inst in out.dataset.instances() {
        assert_eq!(inst.caption_token_count, Vocabulary::clip().count_tokens(&inst.caption));
        assert_eq!(inst.entities.len(), 2);
    }
    // Entity lookups are cached across rows.
    assert!(source.calls.lock().unwrap().values().all(|&n| n == 1));
}

#[test]
fn build_with_no_survivors_fails() {
    let source = MapSource { known: HashMap::new(), calls: Default::default() };
    let rows = vec![WitRow { id: Some("a".into()), caption: "c".into(), image_ref: "x".into(), entity_urls: vec![] }];
    let r = build_dataset(rows, &source, &AllowList(vec![]), Vocabulary::clip(), BuildOptions::default());
    assert!(matches!(r, Err(DatasetError::EmptyDataset)));
}

#[test]
fn build_against_stub_services() {
    let wiki = StubServer::start(|req| {
        let title = req.query_param("titles").unwrap_or_default();
        let page = serde_json::json!({"title": title, "extract": format!("{title} is a place in Bangkok.")});
        StubResponse::json(200, &serde_json::json!({"query": {"pages": [page]}}))
    })
    .unwrap();
    let images = StubServer::start(|req| match req.path.as_str() {
        "/ok.jpg" => StubResponse::status(200),
        "/head-refused.jpg" if req.method == "GET" => StubResponse::status(200),
        "/head-refused.jpg" => StubResponse::status(405),
        _ => StubResponse::status(404),
    })
    .unwrap();
    let client = WikipediaClient::new(WikipediaConfig {
        endpoint: format!("{}/w/api.php", wiki.url()),
        politeness_delay: Duration::ZERO,
        ..WikipediaConfig::default()
    });
    let row = |id: &str, img: &str| WitRow {
        id: Some(id.into()),
        caption: "Phahurat Road at noon".into(),
        image_ref: format!("{}/{img}", images.url()),
        entity_urls: vec!["https://en.wikipedia.org/wiki/Phahurat_Road".into()],
    };
    let out = build_dataset(
        vec![row("a", "ok.jpg"), row("b", "gone.jpg"), row("c", "head-refused.jpg")],
        &client,
        &HttpImageProbe::new(Duration::from_secs(5)),
        Vocabulary::clip(),
        BuildOptions::default(),
    )
    .unwrap();
    let ids: Vec<&str> = out.dataset.instances().iter().map(|i| i.id.as_str()).collect();
    assert_eq!(ids, ["a", "c"]);
    assert_eq!(out.dataset.instances()[0].entities[0].description, "Phahurat Road is a place in Bangkok.");
    assert_eq!(out.dropped[0].id, "b");
}

fn name_strategy() -> impl Strategy<Value = String> {
    prop::sample::select(vec![
        "Nore",
        "nore",
        "River Nore",
        "Castle",
        "Kilkenny Castle",
        "Wat",
        "Wat Pho",
        "Pho",
        "São",
        "Nore (river)",
        "a",
    ])
    .prop_map(str::to_string)
}

proptest! {
    #[test]
    fn matching_equals_bruteforce(
        words in prop::collection::vec(prop::sample::select(vec!["the", "River", "Nore", "Kilkenny", "Castle", "Wat", "Pho", "São", "Noreen", "a", ",", "(river)", "-"]), 0..14),
        names in prop::collection::vec(name_strategy(), 0..6),
    ) {
        let caption = words.join(" ");
        let entries: Vec<EntityEntry> = names.iter().map(|n| entity(n)).collect();
        let got: Vec<String> = match_entities(&caption, &entries).into_iter().map(|e| e.name).collect();
        let want: Vec<String> = match_entities_bruteforce(&caption, &names).into_iter().map(|i| names[i].clone()).collect();
        prop_assert_eq!(&got, &want);
        // Subset of the entity list, and no duplicates.
        for g in &got {
            prop_assert!(names.contains(g));
        }
    }

    #[test]
    fn save_load_identity(n in 1usize..25) {
        let ds = synthetic(n);
        let mut buf = Vec::new();
        save_dataset(&ds, &mut buf).unwrap();
        prop_assert_eq!(load_dataset(buf.as_slice()).unwrap(), ds);
    }
}
