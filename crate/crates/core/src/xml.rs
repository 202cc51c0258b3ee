//! XML interchange: export mirrors the canonical model, import rebuilds an
//! equal [`Meeting`]. The schema ships as `data/mds.xsd`.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use quick_xml::events::{BytesStart, Event};
use quick_xml::Reader;

use crate::dialogue::{Document, Meeting, Modality, Participant, Turn, TurnSpan, Utterance};
use crate::ids::{DocumentId, EpisodeId, MeetingId, ParticipantId, TurnId, UtteranceId};
use crate::mds::{ArgLabel, Episode, ReplyToEdge};

pub const MDS_XSD: &str = include_str!("../data/mds.xsd");

#[derive(Debug, thiserror::Error)]
pub enum XmlError {
    #[error("XML syntax at byte {position}: {message}")]
    Syntax { position: u64, message: String },
    #[error("<{element}>: {message}")]
    Content { element: String, message: String },
    #[error(transparent)]
    Invalid(#[from] crate::dialogue::DialogueError),
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            '\n' => out.push_str("&#10;"),
            '\r' => out.push_str("&#13;"),
            '\t' => out.push_str("&#9;"),
            c => out.push(c),
        }
    }
    out
}

struct Attrs(String);

impl Attrs {
    fn new() -> Self {
        Attrs(String::new())
    }

    fn add(mut self, name: &str, value: impl std::fmt::Display) -> Self {
        let _ = write!(self.0, " {name}=\"{}\"", escape(&value.to_string()));
        self
    }

    fn opt(self, name: &str, value: Option<impl std::fmt::Display>) -> Self {
        match value {
            Some(v) => self.add(name, v),
            None => self,
        }
    }
}

/// Serializes a meeting. Equal meetings give identical bytes.
pub fn export_mds_xml(meeting: &Meeting) -> Vec<u8> {
    let mut x = String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let a = Attrs::new()
        .add("id", &meeting.id)
        .add("title", &meeting.title)
        .opt("date", meeting.date.as_ref())
        .add("root", &meeting.episode_root);
    let _ = writeln!(x, "<meeting{}>", a.0);

    x.push_str("  <participants>\n");
    for p in &meeting.participants {
        let a = Attrs::new().add("id", &p.id).add("name", &p.name).opt("role", p.role.as_ref());
        let _ = writeln!(x, "    <participant{}/>", a.0);
    }
    x.push_str("  </participants>\n  <utterances>\n");
    for u in &meeting.utterances {
        let tags: Vec<&str> = u.da_tags.iter().map(String::as_str).collect();
        let a = Attrs::new()
            .add("id", &u.id)
            .add("speaker", &u.speaker)
            .add("start", u.start)
            .add("end", u.end)
            .add("modality", u.modality.as_str())
            .add("da-tags", tags.join(","));
        let _ = writeln!(x, "    <utterance{}>{}</utterance>", a.0, escape(&u.text));
    }
    x.push_str("  </utterances>\n  <turns>\n");
    for t in &meeting.turns {
        let _ = write!(x, "    <turn{}>", Attrs::new().add("id", &t.id).add("speaker", &t.speaker).0);
        for u in &t.utterances {
            let _ = write!(x, "<utt ref=\"{}\"/>", escape(u.as_str()));
        }
        x.push_str("</turn>\n");
    }
    x.push_str("  </turns>\n  <documents>\n");
    for d in &meeting.documents {
        let a = Attrs::new().add("id", &d.id).add("title", &d.title);
        let _ = writeln!(x, "    <document{}>{}</document>", a.0, escape(&d.text));
    }
    x.push_str("  </documents>\n");
    write_episode(&mut x, meeting, meeting.episode_root.as_str(), 1);
    for edge in &meeting.reply_to {
        let _ = write!(x, "  <reply-to from=\"{}\">", escape(edge.from.as_str()));
        for t in &edge.to {
            let _ = write!(x, "<target ref=\"{}\"/>", escape(t.as_str()));
        }
        x.push_str("</reply-to>\n");
    }
    x.push_str("</meeting>\n");
    x.into_bytes()
}

fn write_episode(x: &mut String, meeting: &Meeting, id: &str, depth: usize) {
    let Some(e) = meeting.episode(id) else { return };
    let indent = "  ".repeat(depth);
    let a = Attrs::new()
        .add("id", &e.id)
        .add("label", &e.label)
        .opt("topic", e.label.topic.as_ref())
        .add("start", e.start)
        .add("end", e.end)
        .opt("turns", e.turn_span)
        .opt("speaker", e.attributed_speaker.as_ref())
        .opt("target", e.target.as_ref());
    if e.children.is_empty() {
        let _ = writeln!(x, "{indent}<episode{}/>", a.0);
        return;
    }
    let _ = writeln!(x, "{indent}<episode{}>", a.0);
    for c in &e.children {
        write_episode(x, meeting, c.as_str(), depth + 1);
    }
    let _ = writeln!(x, "{indent}</episode>");
}

fn content(element: &str, message: impl Into<String>) -> XmlError {
    XmlError::Content { element: element.to_owned(), message: message.into() }
}

struct Element {
    name: String,
    attrs: Vec<(String, String)>,
}

impl Element {
    fn read(e: &BytesStart<'_>) -> Result<Self, XmlError> {
        let name = String::from_utf8_lossy(e.name().as_ref()).into_owned();
        let mut attrs = Vec::new();
        for a in e.attributes() {
            let a = a.map_err(|err| content(&name, err.to_string()))?;
            let key = String::from_utf8_lossy(a.key.as_ref()).into_owned();
            let value = a.unescape_value().map_err(|err| content(&name, err.to_string()))?;
            attrs.push((key, value.into_owned()));
        }
        Ok(Element { name, attrs })
    }

    fn opt(&self, key: &str) -> Option<String> {
        self.attrs.iter().find(|(k, _)| k == key).map(|(_, v)| v.clone())
    }

    fn get(&self, key: &str) -> Result<String, XmlError> {
        self.opt(key).ok_or_else(|| content(&self.name, format!("missing attribute {key}")))
    }

    fn num(&self, key: &str) -> Result<f64, XmlError> {
        let v = self.get(key)?;
        v.parse().map_err(|_| content(&self.name, format!("{key}={v:?} is not a number")))
    }
}

pub fn import_mds_xml(raw: &[u8]) -> Result<Meeting, XmlError> {
    let text = std::str::from_utf8(raw).map_err(|e| XmlError::Syntax {
        position: e.valid_up_to() as u64,
        message: "not UTF-8".into(),
    })?;
    let mut reader = Reader::from_str(text);
    let mut meeting: Option<Meeting> = None;
    // open elements; text is collected for utterance and document bodies
    let mut stack: Vec<String> = Vec::new();
    let mut episode_stack: Vec<EpisodeId> = Vec::new();
    let mut body: Option<String> = None;
    let mut current_turn: Option<usize> = None;
    let mut current_edge: Option<usize> = None;

    loop {
        let event = reader.read_event().map_err(|e| XmlError::Syntax {
            position: reader.buffer_position() as u64,
            message: e.to_string(),
        })?;
        match event {
            Event::Start(ref e) | Event::Empty(ref e) => {
                let is_empty = matches!(event, Event::Empty(_));
                let el = Element::read(e)?;
                let m = meeting.as_mut();
                match (el.name.as_str(), m) {
                    ("meeting", None) => {
                        meeting = Some(Meeting {
                            id: MeetingId::new(el.get("id")?),
                            title: el.get("title")?,
                            date: el.opt("date"),
                            participants: Vec::new(),
                            utterances: Vec::new(),
                            turns: Vec::new(),
                            episode_root: EpisodeId::new(el.get("root")?),
                            episodes: Vec::new(),
                            reply_to: Vec::new(),
                            documents: Vec::new(),
                        });
                    }
                    ("participants" | "utterances" | "turns" | "documents", Some(_)) => {}
                    ("participant", Some(m)) => m.participants.push(Participant {
                        id: ParticipantId::new(el.get("id")?),
                        name: el.get("name")?,
                        role: el.opt("role"),
                    }),
                    ("utterance", Some(m)) => {
                        let modality: Modality =
                            el.get("modality")?.parse().map_err(|e: String| content("utterance", e))?;
                        let tags = el.get("da-tags")?;
                        m.utterances.push(Utterance {
                            id: UtteranceId::new(el.get("id")?),
                            speaker: ParticipantId::new(el.get("speaker")?),
                            start: el.num("start")?,
                            end: el.num("end")?,
                            modality,
                            text: String::new(),
                            da_tags: tags.split(',').filter(|t| !t.is_empty()).map(str::to_owned).collect::<BTreeSet<_>>(),
                        });
                        body = Some(String::new());
                    }
                    ("document", Some(m)) => {
                        m.documents.push(Document {
                            id: DocumentId::new(el.get("id")?),
                            title: el.get("title")?,
                            text: String::new(),
                        });
                        body = Some(String::new());
                    }
                    ("turn", Some(m)) => {
                        m.turns.push(Turn {
                            id: TurnId::new(el.get("id")?),
                            speaker: ParticipantId::new(el.get("speaker")?),
                            utterances: Vec::new(),
                        });
                        current_turn = Some(m.turns.len() - 1);
                    }
                    ("utt", Some(m)) => {
                        let t = current_turn.ok_or_else(|| content("utt", "outside a turn"))?;
                        m.turns[t].utterances.push(UtteranceId::new(el.get("ref")?));
                    }
                    ("episode", Some(m)) => {
                        let id = EpisodeId::new(el.get("id")?);
                        let mut label: ArgLabel = el
                            .get("label")?
                            .parse()
                            .map_err(|e: crate::mds::PatternError| content("episode", e.message))?;
                        label.topic = el.opt("topic");
                        let turn_span = match el.opt("turns") {
                            Some(s) => Some(s.parse::<TurnSpan>().map_err(|e| content("episode", e))?),
                            None => None,
                        };
                        let parent = episode_stack.last().cloned();
                        if let Some(p) = &parent {
                            if let Some(pe) = m.episodes.iter_mut().find(|e| e.id == *p) {
                                pe.children.push(id.clone());
                            }
                        }
                        m.episodes.push(Episode {
                            id: id.clone(),
                            label,
                            start: el.num("start")?,
                            end: el.num("end")?,
                            turn_span,
                            parent,
                            children: Vec::new(),
                            attributed_speaker: el.opt("speaker").map(ParticipantId::new),
                            target: el.opt("target"),
                        });
                        if !is_empty {
                            episode_stack.push(id);
                        }
                    }
                    ("reply-to", Some(m)) => {
                        m.reply_to.push(ReplyToEdge { from: EpisodeId::new(el.get("from")?), to: Vec::new() });
                        current_edge = Some(m.reply_to.len() - 1);
                    }
                    ("target", Some(m)) => {
                        let k = current_edge.ok_or_else(|| content("target", "outside a reply-to"))?;
                        m.reply_to[k].to.push(EpisodeId::new(el.get("ref")?));
                    }
                    (other, _) => return Err(content(other, "unexpected element")),
                }
                if !is_empty {
                    stack.push(el.name);
                }
            }
            Event::End(_) => {
                let name = stack.pop().unwrap_or_default();
                match name.as_str() {
                    "utterance" => {
                        let m = meeting.as_mut().expect("inside meeting");
                        m.utterances.last_mut().expect("pushed").text = body.take().unwrap_or_default();
                    }
                    "document" => {
                        let m = meeting.as_mut().expect("inside meeting");
                        m.documents.last_mut().expect("pushed").text = body.take().unwrap_or_default();
                    }
                    "turn" => current_turn = None,
                    "reply-to" => current_edge = None,
                    "episode" => {
                        episode_stack.pop();
                    }
                    _ => {}
                }
            }
            Event::Text(t) => {
                if let Some(b) = body.as_mut() {
                    let s = t.unescape().map_err(|e| XmlError::Syntax {
                        position: reader.buffer_position() as u64,
                        message: e.to_string(),
                    })?;
                    b.push_str(&s);
                }
            }
            Event::CData(c) => {
                if let Some(b) = body.as_mut() {
                    b.push_str(&String::from_utf8_lossy(&c));
                }
            }
            Event::Eof => break,
            _ => {}
        }
    }
    let meeting = meeting.ok_or_else(|| content("meeting", "no <meeting> element"))?;
    meeting.check_integrity()?;
    Ok(meeting)
}
