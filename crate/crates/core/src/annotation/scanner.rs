use super::{AnnotatedSource, AnnotationBinding, AnnotationError, Diagnostic, EntityKind};
use crate::digest::{fingerprint, Digest, DigestParseError, DIGEST_LEN};

const TAG: &str = "@ontoinstance";

/// Keywords whose declarations are recognized but not bindable.
const UNBINDABLE: &[&str] = &[
    "event", "struct", "enum", "constructor", "fallback", "receive", "using", "pragma", "import",
    "library", "interface", "error", "emit", "return", "type",
];

#[derive(Debug, Clone, PartialEq)]
enum Token<'a> {
    /// Interior of a `/** ... */` comment and the line it starts on.
    DocComment { text: &'a str, line: usize },
    Word { text: &'a str },
    Punct { ch: char },
    Str,
}

struct Tokenizer<'a> {
    src: &'a str,
    pos: usize,
    line: usize,
}

impl<'a> Tokenizer<'a> {
    fn new(src: &'a str) -> Self {
        Self { src, pos: 0, line: 1 }
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn bump(&mut self, len: usize) -> &'a str {
        let s = &self.src[self.pos..self.pos + len];
        self.line += s.bytes().filter(|&b| b == b'\n').count();
        self.pos += len;
        s
    }

    fn next_token(&mut self) -> Option<(Token<'a>, usize)> {
        loop {
            let rest = self.rest();
            let ch = rest.chars().next()?;
            let line = self.line;
            if ch.is_whitespace() {
                self.bump(ch.len_utf8());
            } else if rest.starts_with("//") {
                let len = rest.find('\n').unwrap_or(rest.len());
                self.bump(len);
            } else if let Some(body) = rest.strip_prefix("/*") {
                let end = body.find("*/").map(|i| i + 4).unwrap_or(rest.len());
                let whole = self.bump(end);
                let is_doc = whole.starts_with("/**") && !whole.starts_with("/**/");
                if is_doc {
                    let inner_end = if whole.ends_with("*/") && whole.len() >= 5 {
                        whole.len() - 2
                    } else {
                        whole.len()
                    };
                    return Some((Token::DocComment { text: &whole[3..inner_end], line }, line));
                }
            } else if ch == '"' || ch == '\'' {
                let mut escaped = false;
                let mut len = rest.len();
                for (i, c) in rest.char_indices().skip(1) {
                    if escaped {
                        escaped = false;
                    } else if c == '\\' {
                        escaped = true;
                    } else if c == ch || c == '\n' {
                        len = i + c.len_utf8();
                        break;
                    }
                }
                self.bump(len);
                return Some((Token::Str, line));
            } else if is_word_char(ch) {
                let len = rest
                    .char_indices()
                    .find(|&(_, c)| !is_word_char(c))
                    .map(|(i, _)| i)
                    .unwrap_or(rest.len());
                let text = self.bump(len);
                return Some((Token::Word { text }, line));
            } else {
                self.bump(ch.len_utf8());
                return Some((Token::Punct { ch }, line));
            }
        }
    }
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '$'
}

fn is_identifier(s: &str) -> bool {
    s.chars()
        .next()
        .is_some_and(|c| c.is_alphabetic() || c == '_' || c == '$')
}

/// An `@ontoInstance` tag found in a doc comment.
struct Annotation {
    digest: Digest,
    line: usize,
}

/// Extracts every `@ontoInstance` tag from a doc comment's interior.
///
/// The digest may be wrapped across whitespace or lines; consecutive hex
/// fragments are joined until 64 characters are collected.
fn tags_in_comment(text: &str, start_line: usize) -> Result<Vec<Annotation>, AnnotationError> {
    // (line, word) pairs with Doxygen leading asterisks removed.
    let words: Vec<(usize, &str)> = text
        .split('\n')
        .enumerate()
        .flat_map(|(i, raw)| {
            let trimmed = raw.trim_start().trim_start_matches('*');
            trimmed.split_whitespace().map(move |w| (start_line + i, w))
        })
        .collect();

    let mut found = Vec::new();
    let mut i = 0;
    while i < words.len() {
        let (line, word) = words[i];
        i += 1;
        if !is_tag(word) {
            continue;
        }
        let malformed = |source| AnnotationError::MalformedDigest { line, source };
        let Some(&(_, first)) = words.get(i) else {
            return Err(malformed(DigestParseError::Length { expected: DIGEST_LEN * 2, actual: 0 }));
        };
        i += 1;
        let mut hex_digits = first
            .strip_prefix("0x")
            .or_else(|| first.strip_prefix("0X"))
            .unwrap_or(first)
            .to_string();
        if let Some(c) = hex_digits.chars().find(|c| !c.is_ascii_hexdigit()) {
            return Err(malformed(DigestParseError::NonHex(c)));
        }
        while hex_digits.len() < DIGEST_LEN * 2 {
            match words.get(i) {
                Some(&(_, next)) if next.chars().all(|c| c.is_ascii_hexdigit()) => {
                    hex_digits.push_str(next);
                    i += 1;
                }
                _ => break,
            }
        }
        let digest = Digest::parse(&hex_digits).map_err(malformed)?;
        found.push(Annotation { digest, line });
    }
    Ok(found)
}

fn is_tag(word: &str) -> bool {
    word.get(..TAG.len()).is_some_and(|head| head.eq_ignore_ascii_case(TAG))
        && !word[TAG.len()..].chars().next().is_some_and(is_word_char)
}

/// Scans `source` for `@ontoInstance` annotations and binds each to the
/// declaration that follows it.
pub fn parse_annotations(source: &str) -> Result<AnnotatedSource, AnnotationError> {
    let mut tokenizer = Tokenizer::new(source);
    let mut bindings = Vec::new();
    let mut diagnostics = Vec::new();
    let mut pending: Option<Annotation> = None;
    let mut decl: Vec<Token<'_>> = Vec::new();

    let mut finish = |ann: Annotation, decl: &mut Vec<Token<'_>>, terminator: Option<char>| {
        let (entity_kind, entity_name) = classify(decl, terminator);
        decl.clear();
        bindings.push(AnnotationBinding {
            entity_name,
            entity_kind,
            instance_digest: ann.digest,
            line: ann.line,
        });
    };

    let mut depth: i32 = 0;
    while let Some((token, line)) = tokenizer.next_token() {
        match token {
            Token::DocComment { text, .. } => {
                for ann in tags_in_comment(text, line)? {
                    if !decl.is_empty() {
                        let prev = pending.take().expect("declaration implies annotation");
                        finish(prev, &mut decl, None);
                    } else if let Some(prev) = pending.take() {
                        diagnostics.push(Diagnostic::warning(
                            ann.line,
                            format!(
                                "annotation overrides the one on line {} before the same declaration",
                                prev.line
                            ),
                        ));
                    }
                    pending = Some(ann);
                    depth = 0;
                }
            }
            token if pending.is_some() => {
                let terminator = match token {
                    Token::Punct { ch: '(' | '[' } => {
                        depth += 1;
                        None
                    }
                    Token::Punct { ch: ')' | ']' } => {
                        depth -= 1;
                        None
                    }
                    Token::Punct { ch } if depth <= 0 && (ch == ';' || ch == '{') => Some(ch),
                    Token::Punct { ch: '=' } if depth <= 0 => {
                        let next = tokenizer.rest().chars().next();
                        (!matches!(next, Some('=' | '>'))).then_some('=')
                    }
                    _ => None,
                };
                match terminator {
                    Some(ch) => {
                        let ann = pending.take().expect("checked above");
                        finish(ann, &mut decl, Some(ch));
                    }
                    None => decl.push(token),
                }
            }
            _ => {}
        }
    }
    if let Some(ann) = pending.take() {
        if decl.is_empty() {
            return Err(AnnotationError::Dangling { line: ann.line });
        }
        finish(ann, &mut decl, None);
    }

    bindings.sort_by_key(|b| b.line);
    Ok(AnnotatedSource {
        source_text: source.to_string(),
        bindings,
        source_digest: fingerprint(source.as_bytes()),
        diagnostics,
    })
}

fn classify(decl: &[Token<'_>], terminator: Option<char>) -> (EntityKind, String) {
    let words: Vec<&str> = decl
        .iter()
        .filter_map(|t| match t {
            Token::Word { text } => Some(*text),
            _ => None,
        })
        .collect();
    let unknown = (EntityKind::Unknown, String::new());
    let Some(&first) = words.first() else {
        return unknown;
    };
    let (keyword, rest) = if first == "abstract" && words.get(1) == Some(&"contract") {
        ("contract", &decl[2..])
    } else {
        (first, &decl[1..])
    };
    let named = |kind| match rest.first() {
        Some(Token::Word { text }) if is_identifier(text) => (kind, text.to_string()),
        _ => unknown.clone(),
    };
    match keyword {
        "function" => named(EntityKind::Function),
        "modifier" => named(EntityKind::Modifier),
        "contract" => named(EntityKind::Contract),
        k if UNBINDABLE.contains(&k) => unknown,
        _ => {
            // State variable: `<type> [qualifiers] <name>` ending at `;` or `=`.
            if !matches!(terminator, Some(';' | '=')) || words.len() < 2 {
                return unknown;
            }
            match decl.last() {
                Some(Token::Word { text }) if is_identifier(text) => {
                    (EntityKind::StateVariable, text.to_string())
                }
                _ => unknown,
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const CURATOR_DIGEST: &str = "5c15e9701e5b866b92c31ee4cb0cdd767024a9091db39045310e1fb376db1a65";

    fn d(n: u8) -> String {
        format!("{:064x}", n)
    }

    fn only(source: &str) -> AnnotationBinding {
        let parsed = parse_annotations(source).unwrap();
        assert_eq!(parsed.bindings.len(), 1, "{:?}", parsed.bindings);
        parsed.bindings.into_iter().next().unwrap()
    }

    #[test]
    fn curator_snippet_single_line() {
        let b = only(
            "/** @ontoInstance 0x5C15E9701E5B866B92C31EE4CB0CDD767024A9091DB39045310E1FB376DB1A65 */\naddress curator;\n",
        );
        assert_eq!(b.entity_name, "curator");
        assert_eq!(b.entity_kind, EntityKind::StateVariable);
        assert_eq!(b.instance_digest.to_hex(), CURATOR_DIGEST);
        assert_eq!(b.line, 1);
    }

    #[test]
    fn curator_snippet_wrapped_digest() {
        let src = "/** @ontoInstance\n0x5C15E9701E5B866B92C31EE4CB0CDD767024A9091D\nB39045310E1FB376DB1A65\n*/\naddress curator;\n//Doxygen style annotation of \"curator\"\n";
        let b = only(src);
        assert_eq!(b.entity_name, "curator");
        assert_eq!(b.instance_digest.to_hex(), CURATOR_DIGEST);
    }

    #[test]
    fn declaration_kinds() {
        let src = format!(
            "/** @OntoInstance {a} */ contract Dao {{\n\
             /** @ontoinstance {b} */ function splitDAO(uint id) public returns (bool) {{ }}\n\
             /** @ONTOINSTANCE {c} */ modifier onlyCurator {{ _; }}\n\
             /** @ontoInstance {a} */ mapping (address => uint256) public balances;\n\
             /** @ontoInstance {b} */ uint public minQuorumDivisor = 5;\n\
             /** @ontoInstance {c} */ event Voted(uint id);\n\
             /** @ontoInstance {a} */ abstract contract Base {{ }}\n\
             }}",
            a = d(1),
            b = d(2),
            c = d(3)
        );
        let parsed = parse_annotations(&src).unwrap();
        let got: Vec<_> = parsed
            .bindings
            .iter()
            .map(|b| (b.entity_kind, b.entity_name.as_str(), b.line))
            .collect();
        assert_eq!(
            got,
            [
                (EntityKind::Contract, "Dao", 1),
                (EntityKind::Function, "splitDAO", 2),
                (EntityKind::Modifier, "onlyCurator", 3),
                (EntityKind::StateVariable, "balances", 4),
                (EntityKind::StateVariable, "minQuorumDivisor", 5),
                (EntityKind::Unknown, "", 6),
                (EntityKind::Contract, "Base", 7),
            ]
        );
    }

    #[test]
    fn doxygen_star_prefixed_lines() {
        let src = format!("/**\n * @notice the curator\n * @ontoInstance 0x{}\n */\naddress public curator;", d(9));
        let b = only(&src);
        assert_eq!(b.line, 3);
        assert_eq!(b.entity_name, "curator");
    }

    #[test]
    fn no_annotations() {
        let parsed = parse_annotations("contract A { uint x; }").unwrap();
        assert!(parsed.bindings.is_empty());
        assert_eq!(parsed.source_digest, fingerprint(b"contract A { uint x; }"));
    }

    #[test]
    fn malformed_digest_cites_line() {
        let src = format!("uint a;\n\n/** @ontoInstance 0x{} */\naddress curator;", "Z".repeat(64));
        let err = parse_annotations(&src).unwrap_err();
        assert!(matches!(err, AnnotationError::MalformedDigest { line: 3, .. }), "{err:?}");
        let short = parse_annotations("/** @ontoInstance 0xabcd */ address c;").unwrap_err();
        assert!(matches!(
            short,
            AnnotationError::MalformedDigest { line: 1, source: DigestParseError::Length { actual: 4, .. } }
        ));
        let missing = parse_annotations("\n/** @ontoInstance */ address c;").unwrap_err();
        assert_eq!(missing.line(), 2);
    }

    #[test]
    fn trailing_annotation_is_dangling() {
        let src = format!("address a;\n/** @ontoInstance {} */\n// nothing follows\n", d(1));
        assert_eq!(parse_annotations(&src), Err(AnnotationError::Dangling { line: 2 }));
    }

    #[test]
    fn line_comments_and_strings_do_not_annotate() {
        let src = format!(
            "// @ontoInstance {a}\nstring s = \"/** @ontoInstance {a} */\";\n/* @ontoInstance {a} */ uint x;",
            a = d(1)
        );
        assert!(parse_annotations(&src).unwrap().bindings.is_empty());
    }

    #[test]
    fn second_annotation_overrides_with_warning() {
        let src = format!("/** @ontoInstance {} */\n/** @ontoInstance {} */\naddress curator;", d(1), d(2));
        let parsed = parse_annotations(&src).unwrap();
        assert_eq!(parsed.bindings.len(), 1);
        assert_eq!(parsed.bindings[0].instance_digest.to_hex(), d(2));
        assert_eq!(parsed.diagnostics.len(), 1);
        assert_eq!(parsed.diagnostics[0].to_string().split(':').next(), Some("WARNING"));
        assert_eq!(parsed.diagnostics[0].line, 2);
    }

    #[test]
    fn interleaved_comments_do_not_change_binding() {
        let plain = format!("/** @ontoInstance {} */\naddress curator;", d(4));
        let noisy = format!(
            "/** @ontoInstance {} */\n\n// note\n/* block */\n/** @dev doc only */\n   \naddress curator;",
            d(4)
        );
        let a = only(&plain);
        let b = only(&noisy);
        assert_eq!((a.entity_name, a.entity_kind, a.instance_digest), (b.entity_name, b.entity_kind, b.instance_digest));
    }

    #[test]
    fn statement_is_unknown() {
        let b = only(&format!("/** @ontoInstance {} */ foo(bar);", d(1)));
        assert_eq!(b.entity_kind, EntityKind::Unknown);
        assert!(b.entity_name.is_empty());
        let b = only(&format!("/** @ontoInstance {} */ function () payable {{}}", d(1)));
        assert_eq!(b.entity_kind, EntityKind::Unknown);
    }

    #[test]
    fn other_tags_ignored() {
        let src = format!("/** @param x @ontoInstanceX {} */ uint x;", d(1));
        assert!(parse_annotations(&src).unwrap().bindings.is_empty());
    }
}
