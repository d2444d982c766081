#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace ipeval {

struct Document {
  std::string doc_id;
  std::string source_path;
  std::optional<std::string> title;
  std::string text;  // normalized: NFC, LF newlines
  bool synthetic = false;
};

struct Chunk {
  std::string chunk_id;
  std::string doc_id;
  size_t ordinal = 0;
  std::string text;
  size_t word_count = 0;

  bool operator==(const Chunk&) const = default;
};

struct CorpusLoadError {
  std::string doc_id;
  std::string path;
  std::string message;
};

struct CorpusLoadResult {
  std::vector<Document> documents;
  std::vector<CorpusLoadError> errors;
};

// Manifest is JSONL, one document per line:
//   {"doc_id": "...", "path": "relative/or/absolute.txt",
//    "title": "...", "synthetic": false}
// title and synthetic are optional. Relative paths resolve against the
// manifest's directory. A missing or empty file rejects that document
// only; the rest of the manifest still loads.
CorpusLoadResult load_corpus(const std::filesystem::path& manifest_path);

std::string make_chunk_id(const std::string& doc_id, size_t ordinal);

// Splits on word count. Every chunk has exactly chunk_words words except
// possibly the last; intra-chunk whitespace is preserved so the chunks
// re-tokenize to the document's token sequence.
std::vector<Chunk> chunk_document(const Document& doc, size_t chunk_words);

void write_chunks(const std::filesystem::path& path, const std::vector<Chunk>& chunks);
std::vector<Chunk> read_chunks(const std::filesystem::path& path);

}  // namespace ipeval
