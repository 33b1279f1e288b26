#include "halleval/text.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <stdexcept>

namespace halleval::text {

namespace {

// ---------------------------------------------------------------------------
// UTF-8 helpers
// ---------------------------------------------------------------------------

constexpr char32_t kReplacement = 0xFFFD;

// Decodes one codepoint starting at `i`; advances `i` past it. Invalid bytes
// decode to U+FFFD one byte at a time.
char32_t decode_utf8(const std::string& s, std::size_t& i) {
    const auto byte = [&](std::size_t k) { return static_cast<unsigned char>(s[k]); };
    const unsigned char b0 = byte(i);
    if (b0 < 0x80) {
        ++i;
        return b0;
    }
    std::size_t len = 0;
    char32_t cp = 0;
    if ((b0 & 0xE0) == 0xC0) {
        len = 2;
        cp = b0 & 0x1F;
    } else if ((b0 & 0xF0) == 0xE0) {
        len = 3;
        cp = b0 & 0x0F;
    } else if ((b0 & 0xF8) == 0xF0) {
        len = 4;
        cp = b0 & 0x07;
    } else {
        ++i;
        return kReplacement;
    }
    if (i + len > s.size()) {
        ++i;
        return kReplacement;
    }
    for (std::size_t k = 1; k < len; ++k) {
        const unsigned char bk = byte(i + k);
        if ((bk & 0xC0) != 0x80) {
            ++i;
            return kReplacement;
        }
        cp = (cp << 6) | (bk & 0x3F);
    }
    i += len;
    return cp;
}

void encode_utf8(char32_t cp, std::string& out) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

// ---------------------------------------------------------------------------
// Codepoint classification
// ---------------------------------------------------------------------------

bool is_whitespace_cp(char32_t cp) {
    switch (cp) {
        case U' ': case U'\t': case U'\n': case U'\r': case U'\f': case U'\v':
        case 0x85: case 0xA0: case 0x1680: case 0x2028: case 0x2029:
        case 0x202F: case 0x205F: case 0x3000:
            return true;
        default:
            return (cp >= 0x2000 && cp <= 0x200A);
    }
}

// Letters and digits form words. Latin-1 and Latin Extended-A letters are
// recognized explicitly (covers Italian and Western European text); higher
// planes are treated as word characters except the common punctuation blocks.
bool is_word_cp(char32_t cp) {
    if (cp < 0x80) {
        return (cp >= U'0' && cp <= U'9') || (cp >= U'A' && cp <= U'Z') ||
               (cp >= U'a' && cp <= U'z');
    }
    if (cp < 0x100) {
        if (cp == 0xAA || cp == 0xB5 || cp == 0xBA) return true;
        return cp >= 0xC0 && cp != 0xD7 && cp != 0xF7;
    }
    if (cp <= 0x17F) return true;
    if (cp == kReplacement) return false;
    if (cp >= 0x2010 && cp <= 0x2027) return false;   // dashes, quotes, bullets
    if (cp >= 0x2030 && cp <= 0x205E) return false;   // permille .. punctuation
    if (cp >= 0x2E00 && cp <= 0x2E7F) return false;   // supplemental punctuation
    if (cp >= 0x3001 && cp <= 0x303F) return false;   // CJK punctuation
    return !is_whitespace_cp(cp);
}

char32_t to_lower_cp(char32_t cp) {
    if (cp >= U'A' && cp <= U'Z') return cp + 0x20;
    if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return cp + 0x20;
    if (cp == 0x178) return 0xFF;
    if (cp >= 0x100 && cp <= 0x137 && (cp % 2) == 0) return cp + 1;
    if (cp >= 0x139 && cp <= 0x148 && (cp % 2) == 1) return cp + 1;
    if (cp >= 0x14A && cp <= 0x177 && (cp % 2) == 0) return cp + 1;
    if (cp == 0x179 || cp == 0x17B || cp == 0x17D) return cp + 1;
    return cp;
}

// ---------------------------------------------------------------------------
// HTML entities
// ---------------------------------------------------------------------------

struct NamedEntity {
    const char* name;
    char32_t cp;
};

constexpr std::array<NamedEntity, 24> kEntities = {{
    {"amp", U'&'},     {"lt", U'<'},      {"gt", U'>'},     {"quot", U'"'},
    {"apos", U'\''},   {"nbsp", 0xA0},    {"agrave", 0xE0}, {"aacute", 0xE1},
    {"egrave", 0xE8},  {"eacute", 0xE9},  {"igrave", 0xEC}, {"iacute", 0xED},
    {"ograve", 0xF2},  {"oacute", 0xF3},  {"ugrave", 0xF9}, {"uacute", 0xFA},
    {"Agrave", 0xC0},  {"Aacute", 0xC1},  {"Egrave", 0xC8}, {"Eacute", 0xC9},
    {"Igrave", 0xCC},  {"Ograve", 0xD2},  {"Ugrave", 0xD9}, {"deg", 0xB0},
}};

// Tries to decode an entity reference starting at s[i] == '&'. On success
// appends the character to out, advances i past the ';' and returns true.
bool decode_entity(const std::string& s, std::size_t& i, std::string& out) {
    const std::size_t semi = s.find(';', i + 1);
    if (semi == std::string::npos || semi - i > 12) return false;
    const std::string body = s.substr(i + 1, semi - i - 1);
    if (body.empty()) return false;

    if (body[0] == '#') {
        char32_t cp = 0;
        std::size_t k = 1;
        int base = 10;
        if (k < body.size() && (body[k] == 'x' || body[k] == 'X')) {
            base = 16;
            ++k;
        }
        if (k >= body.size()) return false;
        for (; k < body.size(); ++k) {
            const char c = body[k];
            int digit;
            if (c >= '0' && c <= '9') digit = c - '0';
            else if (base == 16 && c >= 'a' && c <= 'f') digit = c - 'a' + 10;
            else if (base == 16 && c >= 'A' && c <= 'F') digit = c - 'A' + 10;
            else return false;
            cp = cp * base + digit;
            if (cp > 0x10FFFF) return false;
        }
        encode_utf8(cp, out);
        i = semi + 1;
        return true;
    }

    for (const auto& e : kEntities) {
        if (body == e.name) {
            encode_utf8(e.cp, out);
            i = semi + 1;
            return true;
        }
    }
    return false;
}

bool iequals(std::string_view a, std::string_view b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (std::tolower(static_cast<unsigned char>(a[i])) !=
            std::tolower(static_cast<unsigned char>(b[i]))) {
            return false;
        }
    }
    return true;
}

// Scans past a tag starting at s[i] == '<'. Quote-aware so '>' inside
// attribute values does not end the tag. Returns the tag name (lowercased,
// empty for closing/declaration tags) and leaves i past the closing '>'.
std::string skip_tag(const std::string& s, std::size_t& i) {
    std::size_t j = i + 1;
    std::string name;
    bool closing = false;
    if (j < s.size() && s[j] == '/') {
        closing = true;
        ++j;
    }
    while (j < s.size() && std::isalnum(static_cast<unsigned char>(s[j]))) {
        name.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(s[j]))));
        ++j;
    }
    char quote = '\0';
    while (j < s.size()) {
        const char c = s[j];
        if (quote != '\0') {
            if (c == quote) quote = '\0';
        } else if (c == '"' || c == '\'') {
            quote = c;
        } else if (c == '>') {
            ++j;
            break;
        }
        ++j;
    }
    i = j;
    return closing ? std::string() : name;
}

// Skips content up to and including the matching close tag (case-insensitive).
void skip_element_body(const std::string& s, std::size_t& i, std::string_view tag) {
    while (i < s.size()) {
        const std::size_t lt = s.find('<', i);
        if (lt == std::string::npos) {
            i = s.size();
            return;
        }
        std::size_t j = lt + 1;
        if (j < s.size() && s[j] == '/') {
            ++j;
            std::size_t k = j;
            while (k < s.size() && std::isalnum(static_cast<unsigned char>(s[k]))) ++k;
            if (iequals(std::string_view(s).substr(j, k - j), tag)) {
                i = lt;
                skip_tag(s, i);
                return;
            }
        }
        i = lt + 1;
    }
}

}  // namespace

// ---------------------------------------------------------------------------
// NGramMultiset
// ---------------------------------------------------------------------------

std::size_t NGramHash::operator()(const NGram& g) const noexcept {
    std::size_t h = 1469598103934665603ull;  // FNV offset basis
    for (const auto& s : g) {
        for (const char c : s) {
            h ^= static_cast<unsigned char>(c);
            h *= 1099511628211ull;
        }
        h ^= 0x1F;  // separator so {"ab","c"} != {"a","bc"}
        h *= 1099511628211ull;
    }
    return h;
}

NGramMultiset::NGramMultiset(std::size_t arity) : arity_(arity) {
    if (arity == 0) {
        throw std::invalid_argument("n-gram arity must be >= 1");
    }
}

std::size_t NGramMultiset::count(const NGram& g) const {
    const auto it = entries_.find(g);
    return it == entries_.end() ? 0 : it->second;
}

void NGramMultiset::add(NGram g, std::size_t count) {
    if (g.size() != arity_) {
        throw std::invalid_argument("n-gram arity mismatch");
    }
    if (count == 0) return;
    entries_[std::move(g)] += count;
    total_ += count;
}

NGramMultiset NGramMultiset::clipped_intersection(const NGramMultiset& other) const {
    if (arity_ != other.arity_) {
        throw std::invalid_argument("n-gram arity mismatch");
    }
    NGramMultiset out(arity_);
    for (const auto& [gram, cnt] : entries_) {
        const std::size_t clipped = std::min(cnt, other.count(gram));
        if (clipped > 0) out.add(gram, clipped);
    }
    return out;
}

NGramMultiset NGramMultiset::minus(const NGramMultiset& other) const {
    if (arity_ != other.arity_) {
        throw std::invalid_argument("n-gram arity mismatch");
    }
    NGramMultiset out(arity_);
    for (const auto& [gram, cnt] : entries_) {
        const std::size_t kept = cnt - std::min(cnt, other.count(gram));
        if (kept > 0) out.add(gram, kept);
    }
    return out;
}

// ---------------------------------------------------------------------------
// strip_html
// ---------------------------------------------------------------------------

RawText strip_html(const RawText& raw) {
    const std::string& s = raw.content;
    std::string out;
    out.reserve(s.size());
    std::size_t i = 0;
    while (i < s.size()) {
        const char c = s[i];
        if (c == '<') {
            if (s.compare(i, 4, "<!--") == 0) {
                const std::size_t close = s.find("-->", i + 4);
                i = (close == std::string::npos) ? s.size() : close + 3;
                out.push_back(' ');
                continue;
            }
            const std::size_t j = i + 1;
            if (j < s.size() &&
                (std::isalpha(static_cast<unsigned char>(s[j])) || s[j] == '/' ||
                 s[j] == '!' || s[j] == '?')) {
                const std::string name = skip_tag(s, i);
                if (name == "script" || name == "style") {
                    skip_element_body(s, i, name);
                }
                out.push_back(' ');
                continue;
            }
            out.push_back(c);
            ++i;
        } else if (c == '&') {
            if (!decode_entity(s, i, out)) {
                out.push_back(c);
                ++i;
            }
        } else {
            out.push_back(c);
            ++i;
        }
    }
    return RawText{std::move(out)};
}

// ---------------------------------------------------------------------------
// Tokenization
// ---------------------------------------------------------------------------

TokenizedText tokenize_with_spans(const RawText& raw, const NormalizationConfig& cfg) {
    TokenizedText out;
    const std::string& s = raw.content;
    std::string current;
    std::size_t current_begin = 0;

    const auto flush = [&](std::size_t end_offset) {
        if (current.empty()) return;
        Token tok{std::move(current)};
        if (cfg.apply_stemming) tok = stem(tok);
        out.tokens.push_back(std::move(tok));
        out.spans.push_back(CharSpan{current_begin, end_offset});
        current.clear();
    };

    std::size_t i = 0;
    while (i < s.size()) {
        const std::size_t start = i;
        char32_t cp = decode_utf8(s, i);
        if (is_word_cp(cp)) {
            if (current.empty()) current_begin = start;
            if (cfg.lowercase) cp = to_lower_cp(cp);
            encode_utf8(cp, current);
        } else if (is_whitespace_cp(cp)) {
            flush(start);
        } else {
            flush(start);
            if (!cfg.strip_punctuation) {
                std::string surface;
                encode_utf8(cp, surface);
                out.tokens.push_back(Token{std::move(surface)});
                out.spans.push_back(CharSpan{start, i});
            }
        }
    }
    flush(s.size());
    return out;
}

TokenSequence tokenize(const RawText& raw, const NormalizationConfig& cfg) {
    return tokenize_with_spans(raw, cfg).tokens;
}

NGramMultiset ngrams(const TokenSequence& seq, std::size_t n) {
    if (n == 0) {
        throw std::invalid_argument("n-gram order must be >= 1");
    }
    NGramMultiset out(n);
    if (seq.size() < n) return out;
    for (std::size_t i = 0; i + n <= seq.size(); ++i) {
        NGram gram;
        gram.reserve(n);
        for (std::size_t k = 0; k < n; ++k) {
            gram.push_back(seq[i + k].surface);
        }
        out.add(std::move(gram));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Stemming
// ---------------------------------------------------------------------------

Token stem(const Token& token) {
    std::vector<char32_t> cps;
    cps.reserve(token.surface.size());
    std::size_t i = 0;
    while (i < token.surface.size()) {
        char32_t cp = decode_utf8(token.surface, i);
        switch (cp) {
            case 0xE0: case 0xE1: case 0xE2: case 0xE4: cp = U'a'; break;
            case 0xE8: case 0xE9: case 0xEA: case 0xEB: cp = U'e'; break;
            case 0xEC: case 0xED: case 0xEE: case 0xEF: cp = U'i'; break;
            case 0xF2: case 0xF3: case 0xF4: case 0xF6: cp = U'o'; break;
            case 0xF9: case 0xFA: case 0xFB: case 0xFC: cp = U'u'; break;
            default: break;
        }
        cps.push_back(cp);
    }

    // Strip final vowels while the word stays long enough to keep a stem.
    // -ie/-ii and the ch/gh digraphs drop two characters so "banche" and
    // "vecchi" reduce to "banc"/"vecc".
    while (cps.size() >= 6) {
        const char32_t last = cps.back();
        if (last != U'a' && last != U'e' && last != U'i' && last != U'o') break;
        const char32_t prev = cps[cps.size() - 2];
        if ((last == U'e' || last == U'i') && (prev == U'h' || prev == U'i')) {
            cps.resize(cps.size() - 2);
        } else if ((last == U'a' || last == U'o') && prev == U'h') {
            cps.resize(cps.size() - 2);
        } else {
            cps.pop_back();
        }
    }

    std::string out;
    out.reserve(token.surface.size());
    for (const char32_t cp : cps) encode_utf8(cp, out);
    return Token{std::move(out)};
}

std::string join_tokens(const TokenSequence& seq) {
    std::string out;
    for (std::size_t i = 0; i < seq.size(); ++i) {
        if (i > 0) out.push_back(' ');
        out += seq[i].surface;
    }
    return out;
}

std::size_t codepoint_count(const std::string& utf8) {
    std::size_t n = 0;
    for (unsigned char b : utf8) {
        if ((b & 0xC0) != 0x80) ++n;  // count everything but continuation bytes
    }
    return n;
}

}  // namespace halleval::text
