#![allow(dead_code)]

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

pub const WORDS: &[&str] = &[
    "news", "sports", "games", "poker", "science", "school", "fun", "casino", "weather", "music",
    "the", "of", "and", "today", "market", "local", "video", "chess", "puzzle", "betting",
];

pub fn words<R: Rng>(rng: &mut R, n: usize) -> String {
    (0..n)
        .map(|_| *WORDS.choose(rng).unwrap())
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn some_words<R: Rng>(rng: &mut R, n: std::ops::Range<usize>) -> String {
    let n = rng.gen_range(n);
    words(rng, n)
}

fn inline<R: Rng>(rng: &mut R) -> String {
    match rng.gen_range(0..10) {
        0..=3 => some_words(rng, 1..6),
        4 | 5 => {
            let a = some_words(rng, 1..3);
            let u = some_words(rng, 0..3).replace(' ', "/");
            format!(r#"<a href="/{u}">{a}</a>"#)
        }
        6 => {
            let alt = some_words(rng, 0..3);
            if rng.gen_bool(0.2) {
                r#"<img src="pic.png">"#.to_string()
            } else {
                format!(r#"<img src="pic.png" alt="{alt}">"#)
            }
        }
        7 => format!("<b>{}</b>", some_words(rng, 1..4)),
        8 => format!("<script>var {} = 1;</script>", WORDS.choose(rng).unwrap()),
        _ => format!("<!-- {} -->", words(rng, 2)),
    }
}

fn inline_run<R: Rng>(rng: &mut R) -> String {
    let n = rng.gen_range(1..5);
    (0..n).map(|_| inline(rng)).collect::<Vec<_>>().join(" ")
}

fn block<R: Rng>(rng: &mut R, depth: usize) -> String {
    let choice = if depth >= 3 {
        rng.gen_range(0..4)
    } else {
        rng.gen_range(0..9)
    };
    match choice {
        0 => format!("<p>{}</p>", inline_run(rng)),
        1 => format!("<h2>{}</h2>", some_words(rng, 1..4)),
        2 => format!("<li>{}</li>", inline_run(rng)),
        3 => inline_run(rng),
        4 | 5 => format!("<div>{}</div>", blocks(rng, depth + 1)),
        6 => format!("<section>{}</section>", blocks(rng, depth + 1)),
        7 => {
            let items: Vec<String> = (0..rng.gen_range(1..5))
                .map(|_| format!("<li>{}</li>", inline_run(rng)))
                .collect();
            format!("<ul>{}</ul>", items.join("\n"))
        }
        _ => {
            let cells: Vec<String> = (0..rng.gen_range(1..4))
                .map(|_| format!("<td>{}</td>", inline_run(rng)))
                .collect();
            format!("<table><tr>{}</tr></table>", cells.join(""))
        }
    }
}

fn blocks<R: Rng>(rng: &mut R, depth: usize) -> String {
    let n = rng.gen_range(1..5);
    (0..n)
        .map(|_| block(rng, depth))
        .collect::<Vec<_>>()
        .join("\n")
}

/// A random, well-formed-ish page built from the word list.
pub fn random_page<R: Rng>(rng: &mut R) -> String {
    format!(
        "<!DOCTYPE html><html><head><title>t</title></head><body>\n{}\n</body></html>",
        blocks(rng, 0)
    )
}

/// Random disjoint like/unlike keyword lists drawn from the word list.
pub fn random_tracks<R: Rng>(rng: &mut R) -> (Vec<String>, Vec<String>) {
    let mut pool: Vec<&str> = WORDS.to_vec();
    pool.shuffle(rng);
    let nl = rng.gen_range(0..5);
    let nu = rng.gen_range(0..5);
    let like = pool[..nl].iter().map(|s| s.to_string()).collect();
    let unlike = pool[nl..nl + nu].iter().map(|s| s.to_string()).collect();
    (like, unlike)
}

/// Arbitrary tag soup: unbalanced tags, stray end tags, entities, comments.
pub fn soup() -> impl Strategy<Value = String> {
    let frag = prop_oneof![
        Just("<div>".to_string()),
        Just("</div>".to_string()),
        Just("<p>".to_string()),
        Just("</p>".to_string()),
        Just("<b>".to_string()),
        Just("</b>".to_string()),
        Just("<i>".to_string()),
        Just("<li>".to_string()),
        Just("<ul>".to_string()),
        Just("</ul>".to_string()),
        Just("<table>".to_string()),
        Just("<tr>".to_string()),
        Just("<td>".to_string()),
        Just("</table>".to_string()),
        Just("<a href=\"/x/games\">".to_string()),
        Just("</a>".to_string()),
        Just("<img src=a.png alt='poker night'>".to_string()),
        Just("<br>".to_string()),
        Just("<h1>".to_string()),
        Just("<section>".to_string()),
        Just("<span CLASS=a class=b>".to_string()),
        Just("<script>x < y</script>".to_string()),
        Just("<style>p{}</style>".to_string()),
        Just("<!-- c -->".to_string()),
        Just("<pre>\n\nx</pre>".to_string()),
        Just("<textarea>\nq</textarea>".to_string()),
        Just("<select><option>o".to_string()),
        Just("<noscript>n</noscript>".to_string()),
        Just("<template><p>t</p></template>".to_string()),
        Just("<svg><circle r=1></circle></svg>".to_string()),
        Just(" &amp; ".to_string()),
        Just("\n  ".to_string()),
        Just("</body>".to_string()),
        Just("</html> tail".to_string()),
        "[a-z]{1,6}",
        "[A-Za-z0-9 ]{0,12}",
    ];
    proptest::collection::vec(frag, 0..40).prop_map(|v| v.concat())
}
