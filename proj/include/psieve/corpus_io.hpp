#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace psieve {

/// One filterable unit of text. `id` is the 0-based position in ingestion
/// order across the whole input stream; `byte_len` is the UTF-8 size of text.
struct Document {
    std::uint64_t id = 0;
    std::string text;
    std::string source;
    std::uint64_t byte_len = 0;

    static Document make(std::uint64_t id, std::string text, std::string source = {}) {
        Document d{id, std::move(text), std::move(source), 0};
        d.byte_len = d.text.size();
        return d;
    }
};

enum class DocumentFormat {
    Jsonl,   ///< one JSON object per line with a string field "text"
    Txt,     ///< one document per line
    TxtDir,  ///< each regular file in a directory is one document
};

/// Parses "jsonl", "txt" or "txt-dir"; throws Error otherwise.
DocumentFormat parse_format(std::string_view tag);

class LineSource;

/// Pull-style reader over a list of inputs. Paths are visited in the given
/// order; txt-dir entries in lexicographic filename order. Files ending in
/// ".gz" are decompressed on the fly.
class DocumentReader {
public:
    DocumentReader(std::vector<std::filesystem::path> paths, DocumentFormat format);
    ~DocumentReader();
    DocumentReader(DocumentReader&&) noexcept;
    DocumentReader& operator=(DocumentReader&&) noexcept;

    std::optional<Document> next();

    /// Appends up to max_docs documents to out; returns how many were read.
    std::size_t next_batch(std::vector<Document>& out, std::size_t max_docs);

private:
    bool open_next_file();

    std::vector<std::filesystem::path> files_;
    DocumentFormat format_;
    std::size_t file_index_ = 0;
    std::unique_ptr<LineSource> lines_;
    std::string current_path_;
    std::uint64_t line_no_ = 0;
    std::uint64_t next_id_ = 0;
};

std::vector<Document> read_documents(const std::vector<std::filesystem::path>& paths,
                                     DocumentFormat format);

/// Reads a whole (optionally gzip-compressed) file.
std::string read_file(const std::filesystem::path& path);

struct ChunkManifest {
    std::vector<std::string> chunk_paths;
    std::vector<std::uint64_t> per_chunk_bytes;
    std::vector<std::uint64_t> per_chunk_doc_counts;
    std::uint64_t total_docs = 0;
    std::uint64_t total_bytes = 0;
};

/// The exact output line for one document, including the trailing '\n':
/// {"id":<id>,"text":<json string>}
std::string serialize_record(const Document& doc);

/// Streams documents into chunk-00000.jsonl, chunk-00001.jsonl, ... A chunk
/// is closed before a record that would push it past target_bytes, unless
/// the chunk is still empty; a single oversized record gets its own chunk.
/// Sizes are measured on serialized bytes.
class ChunkWriter {
public:
    ChunkWriter(std::filesystem::path out_dir, std::uint64_t target_bytes);

    void add(const Document& doc);

    /// Flushes the open chunk, writes manifest.json and returns the manifest.
    ChunkManifest finish();

private:
    void open_chunk();

    std::filesystem::path out_dir_;
    std::uint64_t target_bytes_;
    std::ofstream out_;
    std::uint64_t open_bytes_ = 0;
    std::uint64_t open_docs_ = 0;
    bool chunk_open_ = false;
    ChunkManifest manifest_;
};

ChunkManifest write_chunks(std::span<const Document> docs, std::uint64_t target_bytes,
                           const std::filesystem::path& out_dir);

void write_manifest_json(const ChunkManifest& manifest, const std::filesystem::path& path);

}  // namespace psieve
