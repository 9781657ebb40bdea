//! Writes the bundled synthetic knowledge base: triples, names, templates,
//! importance scores and annotated documents for four verticals.
//!
//! Usage: cargo run -p chronoline-cli --example gen_synthetic -- data/synthetic

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use chronoline::relevance::{AnnotatedDocument, Mention, MentionKind};
use chronoline::Timestamp;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 20_121_112;
const DOMAINS: usize = 12;

const FIRST: &[&str] = &[
    "Ada", "Ben", "Cara", "Dev", "Elin", "Farid", "Gwen", "Hugo", "Iris", "Jonah", "Kira", "Liam", "Maya", "Nils",
    "Omar", "Pia", "Quinn", "Rosa", "Sami", "Tove", "Umar", "Vera", "Wes", "Xena", "Yuri", "Zoe",
];
const LAST: &[&str] = &[
    "Abbott", "Brandt", "Castell", "Dorsey", "Ekdahl", "Fontaine", "Garza", "Holm", "Ibarra", "Jensen", "Kowal",
    "Lindqvist", "Moreau", "Novak", "Okafor", "Pryce", "Quint", "Rasmussen", "Serra", "Tanaka", "Ulloa", "Varga",
    "Whitlock", "Yilmaz", "Zeller",
];
const WORDS: &[&str] = &[
    "Amber", "Broken", "Cold", "Distant", "Electric", "Falling", "Golden", "Hidden", "Iron", "Last", "Midnight",
    "Northern", "Open", "Paper", "Quiet", "Red", "Silver", "Twelve", "Velvet", "Wild",
];
const NOUNS: &[&str] = &[
    "Harbor", "Signal", "Garden", "River", "Engine", "Season", "Mirror", "Frontier", "Letter", "Orbit", "Lantern",
    "Summit", "Tide", "Echo", "Voyage",
];

#[derive(Default)]
struct Kb {
    triples: Vec<String>,
    names: BTreeMap<String, String>,
    importance: BTreeMap<String, f64>,
    /// (subject, related entity, date) facts that documents talk about.
    facts: Vec<(String, String, Option<Timestamp>)>,
    counter: BTreeMap<&'static str, usize>,
}

impl Kb {
    fn id(&mut self, prefix: &'static str) -> String {
        let n = self.counter.entry(prefix).or_default();
        *n += 1;
        format!("{prefix}{:03}", n)
    }

    fn entity(&mut self, prefix: &'static str, name: String, importance: f64) -> String {
        let id = self.id(prefix);
        self.names.insert(id.clone(), name);
        self.importance.insert(id.clone(), importance);
        id
    }

    fn edge(&mut self, s: &str, p: &str, o: &str) {
        self.triples.push(format!("{s}\t{p}\t{o}"));
    }

    fn date(&mut self, s: &str, p: &str, t: Timestamp) {
        self.triples.push(format!("{s}\t{p}\t@{}", t.iso()));
    }

    fn fact(&mut self, s: &str, re: &str, t: Option<Timestamp>) {
        self.facts.push((s.to_string(), re.to_string(), t));
    }

    /// Reified relation: `s --via--> cvt`, then the given edges out of `cvt`.
    fn cvt(&mut self, s: &str, via: &str, edges: &[(&str, &str)], dates: &[(&str, Timestamp)]) -> String {
        let c = self.id("m.");
        self.edge(s, via, &c);
        for (p, o) in edges {
            self.edge(&c, p, o);
        }
        for (p, t) in dates {
            self.date(&c, p, *t);
        }
        c
    }
}

fn day(rng: &mut ChaCha8Rng, from_year: i32, to_year: i32) -> Timestamp {
    let y = rng.gen_range(from_year..=to_year);
    Timestamp::from_ymd(y, rng.gen_range(1..=12), rng.gen_range(1..=28)).expect("valid date")
}

fn year_of(t: Timestamp) -> i32 {
    t.iso()[..4].parse().expect("iso year")
}

fn person_name(rng: &mut ChaCha8Rng) -> String {
    format!("{} {}", FIRST.choose(rng).unwrap(), LAST.choose(rng).unwrap())
}

fn title(rng: &mut ChaCha8Rng) -> String {
    format!("{} {}", WORDS.choose(rng).unwrap(), NOUNS.choose(rng).unwrap())
}

struct Person {
    id: String,
    born: Timestamp,
}

fn person(kb: &mut Kb, rng: &mut ChaCha8Rng, vertical: &str, cities: &[String], from: i32, to: i32) -> Person {
    let name = person_name(rng);
    let importance = rng.gen_range(0.05..1.0f64);
    let id = kb.entity("p.", name, (importance * 1000.0).round() / 1000.0);
    if !vertical.is_empty() {
        kb.edge(&id, "type", vertical);
    }
    let born = day(rng, from, to);
    kb.date(&id, "date_of_birth", born);
    kb.fact(&id, &id, Some(born));
    if rng.gen_bool(0.1) {
        let died = Timestamp::from_days(born.days() + rng.gen_range(40..80) * 365);
        if year_of(died) < 2015 {
            kb.date(&id, "date_of_death", died);
        }
    }
    let city = cities.choose(rng).unwrap().clone();
    kb.edge(&id, "place_of_birth", &city);
    let nationality = if rng.gen_bool(0.8) { "c.usa" } else if rng.gen_bool(0.5) { "c.uk" } else { "c.canada" };
    kb.edge(&id, "nationality", nationality);
    Person { id, born }
}

fn main() {
    let out: PathBuf = std::env::args().nth(1).unwrap_or_else(|| "data/synthetic".into()).into();
    fs::create_dir_all(&out).expect("create output dir");
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut kb = Kb::default();

    for (id, name) in [("c.usa", "United States"), ("c.uk", "United Kingdom"), ("c.canada", "Canada")] {
        kb.names.insert(id.into(), name.into());
        kb.importance.insert(id.into(), 1.0);
    }
    kb.date("c.usa", "date_founded", Timestamp::from_ymd(1776, 7, 4).unwrap());
    for (id, name) in [("film", "Film"), ("music", "Music"), ("sports", "Sports"), ("business", "Business")] {
        kb.names.insert(id.into(), name.into());
    }
    let cities: Vec<String> = (0..10)
        .map(|i| {
            let name = format!("{} City", NOUNS[i]);
            kb.entity("city.", name, 0.2)
        })
        .collect();

    // film
    let directors: Vec<Person> = (0..6).map(|_| person(&mut kb, &mut rng, "film", &cities, 1935, 1970)).collect();
    let actors: Vec<Person> = (0..36).map(|_| person(&mut kb, &mut rng, "film", &cities, 1940, 1990)).collect();
    let oscar = kb.entity("award.", "Academy Award".into(), 0.9);
    let globe = kb.entity("award.", "Golden Globe".into(), 0.6);
    let mut films = Vec::new();
    for _ in 0..36 {
        let name = format!("The {}", title(&mut rng));
        let film = kb.entity("film.", name, rng.gen_range(0.1..0.9));
        kb.edge(&film, "type", "film");
        let released = day(&mut rng, 1975, 2012);
        kb.date(&film, "release_date", released);
        let director = directors.choose(&mut rng).unwrap();
        kb.edge(&film, "directed_by", &director.id);
        kb.edge(&director.id, "directed", &film);
        kb.fact(&director.id, &film, Some(released));
        films.push((film, released));
    }
    for a in &actors {
        let eligible: Vec<&(String, Timestamp)> =
            films.iter().filter(|(_, r)| year_of(*r) >= year_of(a.born) + 16).collect();
        let k = rng.gen_range(2..=7).min(eligible.len());
        let cast: Vec<&&(String, Timestamp)> = eligible.choose_multiple(&mut rng, k).collect();
        for (film, released) in cast {
            let billing = if rng.gen_bool(0.3) { "billing.lead" } else { "billing.supporting" };
            kb.cvt(&a.id, "film_performance", &[("film", film), ("billing", billing)], &[]);
            kb.fact(&a.id, film, Some(*released));
            if rng.gen_bool(0.12) {
                let award = if rng.gen_bool(0.5) { &oscar } else { &globe };
                let when = Timestamp::from_ymd(year_of(*released) + 1, 3, 1).unwrap();
                kb.cvt(&a.id, "award_won", &[("award", award), ("for_work", film)], &[("year", when)]);
                kb.fact(&a.id, award, Some(when));
            }
        }
    }

    // music
    let musicians: Vec<Person> = (0..24).map(|_| person(&mut kb, &mut rng, "music", &cities, 1945, 1990)).collect();
    let roles = ["role.vocals", "role.guitar", "role.bass", "role.drums"];
    for r in roles {
        kb.names.insert(r.into(), r.trim_start_matches("role.").into());
    }
    let grammy = kb.entity("award.", "Grammy Award".into(), 0.8);
    let mut members = musicians.iter().collect::<Vec<_>>();
    members.shuffle(&mut rng);
    for chunk in members.chunks(3) {
        let band = kb.entity("band.", format!("{}s", title(&mut rng)), rng.gen_range(0.2..0.9));
        kb.edge(&band, "type", "music");
        let youngest = chunk.iter().map(|m| year_of(m.born)).max().unwrap();
        let founded = day(&mut rng, youngest + 17, youngest + 24);
        kb.date(&band, "date_founded", founded);
        for (i, m) in chunk.iter().enumerate() {
            // founding members join on the founding date
            let start = if i < 2 { founded } else { Timestamp::from_days(founded.days() + rng.gen_range(200..2000)) };
            kb.cvt(&m.id, "member_of", &[("band", &band), ("role", roles[i % roles.len()])], &[("start", start)]);
            kb.fact(&m.id, &band, Some(start));
        }
        for _ in 0..rng.gen_range(2..=4) {
            let album = kb.entity("album.", title(&mut rng), rng.gen_range(0.05..0.6));
            let released = Timestamp::from_days(founded.days() + rng.gen_range(300..9000));
            kb.date(&album, "release_date", released);
            kb.edge(&band, "album", &album);
            if rng.gen_bool(0.25) {
                let when = Timestamp::from_ymd(year_of(released) + 1, 2, 10).unwrap();
                for m in chunk {
                    kb.cvt(&m.id, "award_won", &[("award", &grammy), ("for_work", &album)], &[("year", when)]);
                    kb.fact(&m.id, &grammy, Some(when));
                }
            }
        }
    }
    for m in &musicians {
        if rng.gen_bool(0.5) {
            let album = kb.entity("album.", title(&mut rng), rng.gen_range(0.05..0.5));
            let released = Timestamp::from_days(m.born.days() + rng.gen_range(22..45) * 365);
            kb.date(&album, "release_date", released);
            kb.edge(&m.id, "solo_album", &album);
            kb.fact(&m.id, &album, Some(released));
        }
    }

    // sports
    let athletes: Vec<Person> = (0..24).map(|_| person(&mut kb, &mut rng, "sports", &cities, 1960, 1995)).collect();
    let positions = ["pos.forward", "pos.guard", "pos.center"];
    let mvp = kb.entity("award.", "Most Valuable Player".into(), 0.7);
    let teams: Vec<String> = (0..6)
        .map(|i| {
            let name = format!("{} {}", NOUNS[(i * 2) % NOUNS.len()], ["Hawks", "Comets", "Wolves"][i % 3]);
            let team = kb.entity("team.", name, rng.gen_range(0.3..0.9));
            kb.edge(&team, "type", "sports");
            kb.date(&team, "date_founded", day(&mut rng, 1900, 1970));
            for _ in 0..rng.gen_range(1..=3) {
                kb.date(&team, "championship", day(&mut rng, 1980, 2012));
            }
            team
        })
        .collect();
    for a in &athletes {
        let mut from = Timestamp::from_days(a.born.days() + rng.gen_range(18..22) * 365);
        let k = rng.gen_range(1..=3);
        let joined: Vec<&String> = teams.choose_multiple(&mut rng, k).collect();
        for team in joined {
            let position = positions.choose(&mut rng).unwrap();
            kb.cvt(&a.id, "roster", &[("team", team), ("position", position)], &[("from", from)]);
            kb.fact(&a.id, team, Some(from));
            if rng.gen_bool(0.15) {
                let when = Timestamp::from_days(from.days() + 400);
                kb.cvt(&a.id, "award_won", &[("award", &mvp), ("for_work", team)], &[("year", when)]);
                kb.fact(&a.id, &mvp, Some(when));
            }
            from = Timestamp::from_days(from.days() + rng.gen_range(2..6) * 365);
        }
    }

    // business
    let executives: Vec<Person> = (0..14).map(|_| person(&mut kb, &mut rng, "business", &cities, 1940, 1980)).collect();
    let titles = ["title.ceo", "title.cto", "title.cfo"];
    let mut companies = Vec::new();
    for i in 0..12 {
        let name = format!("{} {}", NOUNS[(i * 3) % NOUNS.len()], ["Systems", "Labs", "Holdings", "Works"][i % 4]);
        let company = kb.entity("co.", name, rng.gen_range(0.2..1.0));
        kb.edge(&company, "type", "business");
        let founded = day(&mut rng, 1960, 2005);
        kb.date(&company, "date_founded", founded);
        kb.edge(&company, "headquarters", cities.choose(&mut rng).unwrap());
        for _ in 0..rng.gen_range(1..=3) {
            let product = kb.entity("product.", title(&mut rng), rng.gen_range(0.05..0.7));
            kb.date(&product, "launch_date", Timestamp::from_days(founded.days() + rng.gen_range(200..7000)));
            kb.edge(&company, "product", &product);
        }
        companies.push((company, founded));
    }
    for e in &executives {
        let (founded_co, founded) = companies.choose(&mut rng).unwrap().clone();
        if rng.gen_bool(0.4) {
            kb.edge(&e.id, "founded", &founded_co);
            kb.fact(&e.id, &founded_co, Some(founded));
        }
        let k = rng.gen_range(1..=3);
        let jobs: Vec<&(String, Timestamp)> = companies.choose_multiple(&mut rng, k).collect();
        for (co, founded) in jobs {
            let from = Timestamp::from_days(founded.max(&e.born).days() + rng.gen_range(25..40) * 365);
            let title = titles.choose(&mut rng).unwrap();
            kb.cvt(&e.id, "employment", &[("company", co), ("title", title)], &[("from", from)]);
            kb.fact(&e.id, co, Some(from));
        }
    }
    for _ in 0..6 {
        let pair: Vec<&(String, Timestamp)> = companies.choose_multiple(&mut rng, 2).collect();
        let when = Timestamp::from_days(pair[0].1.max(pair[1].1).days() + rng.gen_range(400..5000));
        kb.cvt(&pair[0].0, "acquisition", &[("target", &pair[1].0)], &[("date", when)]);
        kb.fact(&pair[0].0, &pair[1].0, Some(when));
    }

    // families and marriages across verticals
    let everyone: Vec<&Person> = actors.iter().chain(&musicians).chain(&athletes).chain(&executives).collect();
    for p in everyone.iter().step_by(4) {
        let from = year_of(p.born) - 38;
        let parent = person(&mut kb, &mut rng, "", &cities, from, from + 12);
        kb.edge(&p.id, "parent", &parent.id);
        kb.edge(&parent.id, "children", &p.id);
        kb.fact(&parent.id, &p.id, Some(p.born));
    }
    let mut spouses: Vec<&&Person> = everyone.iter().collect();
    spouses.shuffle(&mut rng);
    for pair in spouses.chunks(2).take(14) {
        let [a, b] = pair else { continue };
        let from = Timestamp::from_days(a.born.days().max(b.born.days()) + rng.gen_range(20..35) * 365);
        kb.cvt(&a.id, "marriage", &[("spouse", &b.id)], &[("from", from)]);
        kb.cvt(&b.id, "marriage", &[("spouse", &a.id)], &[("from", from)]);
        kb.fact(&a.id, &b.id, Some(from));
    }

    write_outputs(&out, &kb, &mut rng);
}

fn documents(kb: &Kb, rng: &mut ChaCha8Rng) -> Vec<AnnotatedDocument> {
    let ids: Vec<&String> = kb.names.keys().collect();
    let mut docs = Vec::new();
    for (s, re, t) in &kb.facts {
        // widely reported facts reach enough domains to count
        let copies = rng.gen_range(0..=9);
        for _ in 0..copies {
            let domain = format!("site{:02}.example", rng.gen_range(0..DOMAINS));
            let mut mentions = Vec::new();
            let mut pos = rng.gen_range(0..200u64);
            mentions.push(Mention { pos, kind: MentionKind::Entity, id: s.clone() });
            if re != s {
                pos += rng.gen_range(10..60);
                mentions.push(Mention { pos, kind: MentionKind::Entity, id: re.clone() });
            }
            if let Some(t) = t {
                if rng.gen_bool(0.8) {
                    pos += rng.gen_range(5..40);
                    mentions.push(Mention { pos, kind: MentionKind::Date, id: t.iso() });
                }
            }
            // unrelated mentions outside the window
            for _ in 0..rng.gen_range(1..4) {
                pos += rng.gen_range(150..400);
                let other = ids.choose(rng).unwrap();
                mentions.push(Mention { pos, kind: MentionKind::Entity, id: (*other).clone() });
            }
            docs.push(AnnotatedDocument { domain, mentions });
        }
    }
    docs.shuffle(rng);
    docs
}

const TEMPLATES: &[(&str, &str, &str)] = &[
    ("self", "self.date_of_birth", "{sub} was born on {date}"),
    ("self", "self.date_of_death", "{sub} died on {date}"),
    ("self", "self.date_founded", "{sub} was founded on {date}"),
    ("self", "self.release_date", "{sub} was released on {date}"),
    ("self", "self.championship", "{sub} won the championship on {date}"),
    ("self", "self.award_won.year", "{sub} won an award on {date}"),
    ("self", "self.member_of.start", "{sub} joined a band on {date}"),
    ("self", "self.roster.from", "{sub} joined a team on {date}"),
    ("self", "self.employment.from", "{sub} took a new position on {date}"),
    ("self", "self.marriage.from", "{sub} got married on {date}"),
    ("self", "self.acquisition.date", "{sub} made an acquisition on {date}"),
    ("film_performance.film", "film_performance.film.release_date", "{sub} starred in {re}, released {date}"),
    ("directed", "directed.release_date", "{sub} directed {re}, released {date}"),
    ("directed_by", "directed_by.date_of_birth", "{re}, director of {sub}, was born on {date}"),
    ("award_won.award", "award_won.award.date_founded", "{re} was established on {date}"),
    ("member_of.band", "member_of.band.date_founded", "{sub}'s band {re} formed on {date}"),
    ("album", "album.release_date", "{sub} released the album {re} on {date}"),
    ("solo_album", "solo_album.release_date", "{sub} released the solo album {re} on {date}"),
    ("roster.team", "roster.team.championship", "{re}, a team of {sub}, won the championship on {date}"),
    ("roster.team", "roster.team.date_founded", "{re}, a team of {sub}, was founded on {date}"),
    ("employment.company", "employment.company.date_founded", "{re}, employer of {sub}, was founded on {date}"),
    ("founded", "founded.date_founded", "{sub} founded {re} on {date}"),
    ("product", "product.launch_date", "{sub} launched {re} on {date}"),
    ("acquisition.target", "acquisition.target.date_founded", "{re}, acquired by {sub}, was founded on {date}"),
    ("children", "children.date_of_birth", "{sub}'s child {re} was born on {date}"),
    ("parent", "parent.date_of_birth", "{sub}'s parent {re} was born on {date}"),
    ("marriage.spouse", "marriage.spouse.date_of_birth", "{sub}'s spouse {re} was born on {date}"),
    ("nationality", "nationality.date_founded", "{re}, home country of {sub}, was founded on {date}"),
    ("film_performance.film.film_performance.film", "film_performance.film.release_date", "{sub} and {re} appeared in a film released {date}"),
    ("member_of.member_of", "member_of.start", "{sub} and {re} started a band together on {date}"),
    ("roster.team.roster.team", "roster.team.championship", "{sub} and {re} were teammates when their team won on {date}"),
];

fn write_outputs(out: &std::path::Path, kb: &Kb, rng: &mut ChaCha8Rng) {
    let mut triples = String::from("# subject\tpredicate\tobject (objects starting with @ are dates)\n");
    for t in &kb.triples {
        triples.push_str(t);
        triples.push('\n');
    }
    fs::write(out.join("kb.tsv"), triples).unwrap();

    let mut names = String::new();
    for (id, name) in &kb.names {
        writeln!(names, "{id}\t{name}").unwrap();
    }
    for (p, name) in [
        ("date_of_birth", "born"),
        ("date_of_death", "died"),
        ("date_founded", "founded"),
        ("release_date", "released"),
        ("launch_date", "launched"),
    ] {
        writeln!(names, "{p}\t{name}").unwrap();
    }
    fs::write(out.join("names.tsv"), names).unwrap();

    let mut importance = String::new();
    for (id, score) in &kb.importance {
        writeln!(importance, "{id}\t{score:.3}").unwrap();
    }
    fs::write(out.join("importance.tsv"), importance).unwrap();

    let mut templates = String::from("# path_to_re\tpath_to_ts\tpattern\n");
    for (re, ts, pattern) in TEMPLATES {
        writeln!(templates, "{re}\t{ts}\t{pattern}").unwrap();
    }
    fs::write(out.join("templates.tsv"), templates).unwrap();

    let mut docs = String::new();
    for d in documents(kb, rng) {
        docs.push_str(&serde_json::to_string(&d).unwrap());
        docs.push('\n');
    }
    fs::write(out.join("documents.jsonl"), docs).unwrap();
    eprintln!("wrote {} triples and {} entities to {}", kb.triples.len(), kb.names.len(), out.display());
}
