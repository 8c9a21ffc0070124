#include "psieve/corpus_io.hpp"

#include "psieve/error.hpp"

#include <zlib.h>

#include <algorithm>
#include <array>
#include <cerrno>
#include <cstring>
#include <iomanip>
#include <sstream>

#include "json.hpp"

namespace psieve {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

bool has_gz_suffix(const fs::path& p) { return p.extension() == ".gz"; }

void strip_cr(std::string& line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
}

}  // namespace

// Line-at-a-time access to a plain or gzip file.
class LineSource {
public:
    explicit LineSource(const fs::path& path) : path_(path.string()) {
        if (has_gz_suffix(path)) {
            gz_ = gzopen(path_.c_str(), "rb");
            if (gz_ == nullptr) throw Error("cannot open " + path_ + ": " + std::strerror(errno));
            gzbuffer(gz_, 1 << 17);
        } else {
            in_.open(path, std::ios::binary);
            if (!in_) throw Error("cannot open " + path_ + ": " + std::strerror(errno));
        }
    }

    ~LineSource() {
        if (gz_ != nullptr) gzclose(gz_);
    }

    LineSource(const LineSource&) = delete;
    LineSource& operator=(const LineSource&) = delete;

    bool getline(std::string& line) {
        if (gz_ == nullptr) {
            if (!std::getline(in_, line)) {
                if (in_.bad()) throw Error("read error in " + path_);
                return false;
            }
            return true;
        }
        line.clear();
        std::array<char, 1 << 14> buf;
        bool any = false;
        while (gzgets(gz_, buf.data(), static_cast<int>(buf.size())) != nullptr) {
            any = true;
            const std::size_t n = std::strlen(buf.data());
            if (n > 0 && buf[n - 1] == '\n') {
                line.append(buf.data(), n - 1);
                return true;
            }
            line.append(buf.data(), n);
        }
        int errnum = 0;
        const char* msg = gzerror(gz_, &errnum);
        if (errnum != Z_OK && errnum != Z_STREAM_END)
            throw Error("read error in " + path_ + ": " + msg);
        return any;
    }

private:
    std::string path_;
    std::ifstream in_;
    gzFile gz_ = nullptr;
};

DocumentFormat parse_format(std::string_view tag) {
    if (tag == "jsonl") return DocumentFormat::Jsonl;
    if (tag == "txt") return DocumentFormat::Txt;
    if (tag == "txt-dir") return DocumentFormat::TxtDir;
    throw Error("unknown input format '" + std::string(tag) + "' (expected jsonl, txt or txt-dir)");
}

std::string read_file(const fs::path& path) {
    const std::string name = path.string();
    if (has_gz_suffix(path)) {
        gzFile gz = gzopen(name.c_str(), "rb");
        if (gz == nullptr) throw Error("cannot open " + name + ": " + std::strerror(errno));
        std::string out;
        std::array<char, 1 << 16> buf;
        int n = 0;
        while ((n = gzread(gz, buf.data(), static_cast<unsigned>(buf.size()))) > 0)
            out.append(buf.data(), static_cast<std::size_t>(n));
        int errnum = 0;
        const std::string msg = gzerror(gz, &errnum);
        gzclose(gz);
        if (n < 0 || (errnum != Z_OK && errnum != Z_STREAM_END))
            throw Error("read error in " + name + ": " + msg);
        return out;
    }
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + name + ": " + std::strerror(errno));
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw Error("read error in " + name);
    return std::move(ss).str();
}

DocumentReader::DocumentReader(std::vector<fs::path> paths, DocumentFormat format)
    : format_(format) {
    for (auto& p : paths) {
        std::error_code ec;
        if (format == DocumentFormat::TxtDir) {
            if (!fs::is_directory(p, ec)) throw Error("cannot read directory " + p.string());
            std::vector<fs::path> entries;
            for (const auto& entry : fs::directory_iterator(p, ec))
                if (entry.is_regular_file()) entries.push_back(entry.path());
            if (ec) throw Error("cannot list " + p.string() + ": " + ec.message());
            std::sort(entries.begin(), entries.end(),
                      [](const fs::path& a, const fs::path& b) {
                          return a.filename().string() < b.filename().string();
                      });
            files_.insert(files_.end(), entries.begin(), entries.end());
        } else {
            if (!fs::is_regular_file(p, ec)) throw Error("cannot read file " + p.string());
            files_.push_back(std::move(p));
        }
    }
}

DocumentReader::~DocumentReader() = default;
DocumentReader::DocumentReader(DocumentReader&&) noexcept = default;
DocumentReader& DocumentReader::operator=(DocumentReader&&) noexcept = default;

bool DocumentReader::open_next_file() {
    if (file_index_ >= files_.size()) return false;
    current_path_ = files_[file_index_].string();
    lines_ = std::make_unique<LineSource>(files_[file_index_]);
    line_no_ = 0;
    ++file_index_;
    return true;
}

std::optional<Document> DocumentReader::next() {
    if (format_ == DocumentFormat::TxtDir) {
        if (file_index_ >= files_.size()) return std::nullopt;
        const fs::path& p = files_[file_index_++];
        return Document::make(next_id_++, read_file(p), p.string());
    }

    std::string line;
    for (;;) {
        if (!lines_ && !open_next_file()) return std::nullopt;
        if (!lines_->getline(line)) {
            lines_.reset();
            continue;
        }
        ++line_no_;
        strip_cr(line);

        if (format_ == DocumentFormat::Txt) return Document::make(next_id_++, std::move(line), current_path_);

        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        const auto where = [&] { return current_path_ + ":" + std::to_string(line_no_); };
        json obj = json::parse(line, nullptr, false);
        if (obj.is_discarded() || !obj.is_object()) throw Error(where() + ": malformed jsonl line");
        auto it = obj.find("text");
        if (it == obj.end() || !it->is_string())
            throw Error(where() + ": missing string field \"text\"");
        return Document::make(next_id_++, it->get<std::string>(), current_path_);
    }
}

std::size_t DocumentReader::next_batch(std::vector<Document>& out, std::size_t max_docs) {
    std::size_t n = 0;
    while (n < max_docs) {
        auto doc = next();
        if (!doc) break;
        out.push_back(std::move(*doc));
        ++n;
    }
    return n;
}

std::vector<Document> read_documents(const std::vector<fs::path>& paths, DocumentFormat format) {
    DocumentReader reader(paths, format);
    std::vector<Document> docs;
    while (auto d = reader.next()) docs.push_back(std::move(*d));
    return docs;
}

std::string serialize_record(const Document& doc) {
    std::string out = "{\"id\":";
    out += std::to_string(doc.id);
    out += ",\"text\":";
    out += json(doc.text).dump(-1, ' ', false, json::error_handler_t::replace);
    out += "}\n";
    return out;
}

ChunkWriter::ChunkWriter(fs::path out_dir, std::uint64_t target_bytes)
    : out_dir_(std::move(out_dir)), target_bytes_(target_bytes) {
    if (target_bytes_ == 0) throw Error("target_bytes must be at least 1");
    std::error_code ec;
    fs::create_directories(out_dir_, ec);
    if (ec || !fs::is_directory(out_dir_))
        throw Error("cannot create output directory " + out_dir_.string() +
                    (ec ? ": " + ec.message() : ""));
}

void ChunkWriter::open_chunk() {
    std::ostringstream name;
    name << "chunk-" << std::setw(5) << std::setfill('0') << manifest_.chunk_paths.size() << ".jsonl";
    const fs::path path = out_dir_ / name.str();
    out_.open(path, std::ios::binary | std::ios::trunc);
    if (!out_) throw Error("cannot write " + path.string());
    manifest_.chunk_paths.push_back(path.string());
    open_bytes_ = 0;
    open_docs_ = 0;
    chunk_open_ = true;
}

void ChunkWriter::add(const Document& doc) {
    const std::string record = serialize_record(doc);
    if (chunk_open_ && open_docs_ > 0 && open_bytes_ + record.size() > target_bytes_) {
        out_.close();
        manifest_.per_chunk_bytes.push_back(open_bytes_);
        manifest_.per_chunk_doc_counts.push_back(open_docs_);
        chunk_open_ = false;
    }
    if (!chunk_open_) open_chunk();
    out_.write(record.data(), static_cast<std::streamsize>(record.size()));
    if (!out_) throw Error("write failed for " + manifest_.chunk_paths.back());
    open_bytes_ += record.size();
    ++open_docs_;
    manifest_.total_bytes += record.size();
    ++manifest_.total_docs;
}

ChunkManifest ChunkWriter::finish() {
    if (chunk_open_) {
        out_.close();
        if (!out_) throw Error("write failed for " + manifest_.chunk_paths.back());
        manifest_.per_chunk_bytes.push_back(open_bytes_);
        manifest_.per_chunk_doc_counts.push_back(open_docs_);
        chunk_open_ = false;
    }
    write_manifest_json(manifest_, out_dir_ / "manifest.json");
    return manifest_;
}

ChunkManifest write_chunks(std::span<const Document> docs, std::uint64_t target_bytes,
                           const fs::path& out_dir) {
    ChunkWriter writer(out_dir, target_bytes);
    for (const auto& d : docs) writer.add(d);
    return writer.finish();
}

void write_manifest_json(const ChunkManifest& manifest, const fs::path& path) {
    json j;
    // File names only, so an output directory can be moved as a unit.
    std::vector<std::string> names;
    for (const auto& c : manifest.chunk_paths) names.push_back(fs::path(c).filename().string());
    j["chunks"] = names;
    j["per_chunk_bytes"] = manifest.per_chunk_bytes;
    j["per_chunk_doc_counts"] = manifest.per_chunk_doc_counts;
    j["total_docs"] = manifest.total_docs;
    j["total_bytes"] = manifest.total_bytes;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    out << j.dump(2) << '\n';
    if (!out) throw Error("write failed for " + path.string());
}

}  // namespace psieve
