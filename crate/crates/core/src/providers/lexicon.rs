//! Closed English–Korean vocabulary shared by the mock translator, the
//! cross-lingual mock embedder and the synthetic corpus generator.
//!
//! Every entry is a single token on both sides and the mapping is a
//! bijection, so word-by-word translation round-trips losslessly.

/// Query template words.
pub const TEMPLATE: &[(&str, &str)] = &[
    ("recommend", "추천해"),
    ("some", "몇몇"),
    ("files", "파일들"),
    ("about", "관련"),
    ("retrieve", "검색해"),
    ("or", "또는"),
    ("give", "주세요"),
    ("me", "나에게"),
    ("image", "이미지"),
    ("audio", "오디오"),
    ("video", "비디오"),
    ("document", "문서"),
];

/// Words the mock LLM uses in its answers.
pub const RESPONSE: &[(&str, &str)] =
    &[("recommended", "추천됨"), ("no", "없음"), ("matching", "일치하는"), ("found", "발견됨")];

/// Topic words (a topic may span several words).
pub const TOPIC_WORDS: &[(&str, &str)] = &[
    ("wildlife", "야생동물"),
    ("landscapes", "풍경"),
    ("celebrities", "유명인"),
    ("political", "정치"),
    ("events", "행사"),
    ("sports", "스포츠"),
    ("architecture", "건축"),
    ("cuisine", "요리"),
    ("technology", "기술"),
    ("festivals", "축제"),
    ("oceans", "바다"),
];

/// Subjects associated with each default topic, used for titles and text.
pub const TOPIC_SUBJECTS: &[(&str, [(&str, &str); 3])] = &[
    ("wildlife", [("lions", "사자들"), ("elephants", "코끼리들"), ("birds", "새들")]),
    ("landscapes", [("mountains", "산맥"), ("valleys", "계곡"), ("rivers", "강들")]),
    ("celebrities", [("actors", "배우들"), ("singers", "가수들"), ("premieres", "시사회")]),
    ("political events", [("elections", "선거"), ("debates", "토론"), ("summits", "정상회담")]),
    ("sports", [("football", "축구"), ("marathons", "마라톤"), ("tennis", "테니스")]),
    ("architecture", [("cathedrals", "대성당"), ("bridges", "다리들"), ("towers", "탑들")]),
    ("cuisine", [("noodles", "국수"), ("spices", "향신료"), ("desserts", "디저트")]),
    ("technology", [("robots", "로봇들"), ("semiconductors", "반도체"), ("satellites", "위성")]),
    ("festivals", [("lanterns", "등불"), ("parades", "퍼레이드"), ("fireworks", "불꽃놀이")]),
    ("oceans", [("reefs", "산호초"), ("whales", "고래들"), ("tides", "조수")]),
];

pub const ADJECTIVES: &[(&str, &str)] = &[
    ("golden", "황금빛"),
    ("quiet", "고요한"),
    ("vivid", "생생한"),
    ("ancient", "고대의"),
    ("modern", "현대의"),
    ("distant", "먼"),
    ("bright", "밝은"),
    ("rare", "희귀한"),
];

fn all_pairs() -> impl Iterator<Item = (&'static str, &'static str)> {
    TEMPLATE
        .iter()
        .chain(RESPONSE)
        .chain(TOPIC_WORDS)
        .chain(ADJECTIVES)
        .copied()
        .chain(TOPIC_SUBJECTS.iter().flat_map(|(_, s)| s.iter().copied()))
}

pub fn en_to_ko(word: &str) -> Option<&'static str> {
    all_pairs().find(|(en, _)| *en == word).map(|(_, ko)| ko)
}

pub fn ko_to_en(word: &str) -> Option<&'static str> {
    all_pairs().find(|(_, ko)| *ko == word).map(|(en, _)| en)
}

/// Subjects for a topic, if it is one of the default topics.
pub fn subjects_for(topic: &str) -> Option<&'static [(&'static str, &'static str); 3]> {
    TOPIC_SUBJECTS.iter().find(|(t, _)| *t == topic).map(|(_, s)| s)
}
