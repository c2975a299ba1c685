#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace cpsg {

enum class MeetingGroup { convention, kyoto_protocol, paris_agreement };

std::string to_string(MeetingGroup group);
MeetingGroup meeting_group_from_string(const std::string& name);

struct SourceDocument {
    std::string doc_id;
    MeetingGroup meeting_group = MeetingGroup::convention;
    std::string title;
    std::string body_text;
    std::string source_path;
    bool verified = false;
};

// Loads a line-delimited manifest {doc_id, meeting_group, title, path, verified}.
// Paths are resolved relative to the manifest's directory. Documents come back
// in manifest order. Missing files, empty bodies, and duplicate doc_ids abort
// with the offending entry named.
std::vector<SourceDocument> load_corpus(const std::filesystem::path& manifest_path);

}  // namespace cpsg
