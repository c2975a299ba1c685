#include "cpsg/corpus.hpp"

#include <fstream>
#include <sstream>
#include <unordered_set>

#include "cpsg/jsonl.hpp"

namespace cpsg {

std::string to_string(MeetingGroup group) {
    switch (group) {
        case MeetingGroup::convention: return "convention";
        case MeetingGroup::kyoto_protocol: return "kyoto_protocol";
        case MeetingGroup::paris_agreement: return "paris_agreement";
    }
    throw ValidationError("unknown meeting group value");
}

MeetingGroup meeting_group_from_string(const std::string& name) {
    if (name == "convention") return MeetingGroup::convention;
    if (name == "kyoto_protocol") return MeetingGroup::kyoto_protocol;
    if (name == "paris_agreement") return MeetingGroup::paris_agreement;
    throw ValidationError("unknown meeting_group: " + name);
}

namespace {

bool is_all_whitespace(const std::string& s) {
    for (unsigned char c : s) {
        if (!std::isspace(c)) return false;
    }
    return true;
}

}  // namespace

std::vector<SourceDocument> load_corpus(const std::filesystem::path& manifest_path) {
    auto records = jsonl::read_records(manifest_path);
    auto base_dir = manifest_path.parent_path();

    std::vector<SourceDocument> docs;
    docs.reserve(records.size());
    std::unordered_set<std::string> seen_ids;

    for (const auto& rec : records) {
        SourceDocument doc;
        doc.doc_id = rec.at("doc_id").get<std::string>();
        doc.meeting_group = meeting_group_from_string(rec.at("meeting_group").get<std::string>());
        doc.title = rec.value("title", "");
        doc.verified = rec.value("verified", false);

        if (!seen_ids.insert(doc.doc_id).second) {
            throw ValidationError("duplicate doc_id in manifest: " + doc.doc_id);
        }

        std::filesystem::path path = rec.at("path").get<std::string>();
        if (path.is_relative()) path = base_dir / path;
        doc.source_path = path.string();

        std::ifstream in(path, std::ios::binary);
        if (!in) {
            throw IoError("manifest entry " + doc.doc_id + ": missing file " + path.string());
        }
        std::ostringstream body;
        body << in.rdbuf();
        doc.body_text = body.str();
        if (doc.body_text.empty() || is_all_whitespace(doc.body_text)) {
            throw ValidationError("manifest entry " + doc.doc_id + ": empty body");
        }
        docs.push_back(std::move(doc));
    }
    return docs;
}

}  // namespace cpsg
