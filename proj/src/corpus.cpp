#include "ipeval/corpus.hpp"

#include <set>
#include <stdexcept>

#include "ipeval/jsonl.hpp"
#include "ipeval/text.hpp"
#include "ipeval/util.hpp"

namespace ipeval {

CorpusLoadResult load_corpus(const std::filesystem::path& manifest_path) {
  namespace fs = std::filesystem;
  CorpusLoadResult result;
  std::vector<nlohmann::json> rows = read_jsonl(manifest_path);
  fs::path base = manifest_path.has_parent_path() ? manifest_path.parent_path() : fs::path(".");

  std::set<std::string> seen_ids;
  for (const auto& row : rows) {
    std::string doc_id = row.value("doc_id", "");
    std::string rel_path = row.value("path", "");
    if (doc_id.empty() || rel_path.empty()) {
      result.errors.push_back({doc_id, rel_path, "manifest row needs doc_id and path"});
      continue;
    }
    if (!seen_ids.insert(doc_id).second) {
      result.errors.push_back({doc_id, rel_path, "duplicate doc_id"});
      continue;
    }
    fs::path doc_path(rel_path);
    if (doc_path.is_relative()) doc_path = base / doc_path;

    std::string raw;
    try {
      raw = read_text_file(doc_path);
    } catch (const std::exception& e) {
      result.errors.push_back({doc_id, doc_path.string(), e.what()});
      continue;
    }

    Document doc;
    doc.doc_id = doc_id;
    doc.source_path = doc_path.string();
    if (row.contains("title") && row["title"].is_string()) {
      doc.title = row["title"].get<std::string>();
    }
    doc.synthetic = row.value("synthetic", false);
    doc.text = normalize_text(raw);
    if (count_words(doc.text) == 0) {
      result.errors.push_back({doc_id, doc_path.string(), "empty document"});
      continue;
    }
    result.documents.push_back(std::move(doc));
  }
  return result;
}

std::string make_chunk_id(const std::string& doc_id, size_t ordinal) {
  return doc_id + ":c" + std::to_string(ordinal);
}

std::vector<Chunk> chunk_document(const Document& doc, size_t chunk_words) {
  if (chunk_words == 0) {
    throw std::invalid_argument("chunk_words must be >= 1");
  }
  std::vector<TokenSpan> spans = token_spans(doc.text);
  std::vector<Chunk> chunks;
  size_t ordinal = 0;
  for (size_t start = 0; start < spans.size(); start += chunk_words) {
    size_t end = std::min(start + chunk_words, spans.size());
    // slice the original text between the first and last word of the
    // window so intra-chunk whitespace survives
    size_t byte_begin = spans[start].begin;
    size_t byte_end = spans[end - 1].end;
    Chunk chunk;
    chunk.doc_id = doc.doc_id;
    chunk.ordinal = ordinal;
    chunk.chunk_id = make_chunk_id(doc.doc_id, ordinal);
    chunk.text = doc.text.substr(byte_begin, byte_end - byte_begin);
    chunk.word_count = end - start;
    chunks.push_back(std::move(chunk));
    ++ordinal;
  }
  return chunks;
}

void write_chunks(const std::filesystem::path& path, const std::vector<Chunk>& chunks) {
  std::vector<nlohmann::json> rows;
  rows.reserve(chunks.size());
  for (const Chunk& c : chunks) {
    rows.push_back({{"schema", "chunk.v1"},
                    {"chunk_id", c.chunk_id},
                    {"doc_id", c.doc_id},
                    {"ordinal", c.ordinal},
                    {"word_count", c.word_count},
                    {"text", c.text}});
  }
  write_jsonl(path, rows);
}

std::vector<Chunk> read_chunks(const std::filesystem::path& path) {
  std::vector<Chunk> chunks;
  for (const auto& row : read_jsonl(path)) {
    if (row.value("schema", "") != "chunk.v1") {
      throw std::runtime_error(path.string() + ": unexpected chunk schema");
    }
    Chunk c;
    c.chunk_id = row.at("chunk_id").get<std::string>();
    c.doc_id = row.at("doc_id").get<std::string>();
    c.ordinal = row.at("ordinal").get<size_t>();
    c.word_count = row.at("word_count").get<size_t>();
    c.text = row.at("text").get<std::string>();
    chunks.push_back(std::move(c));
  }
  return chunks;
}

}  // namespace ipeval
