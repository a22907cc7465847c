#include "contentcf/types.hpp"

namespace contentcf {

std::string to_string(ProfileSource source) {
    switch (source) {
        case ProfileSource::dataset: return "dataset";
        case ProfileSource::linked_data: return "linked-data";
        case ProfileSource::override_file: return "override";
    }
    return "dataset";
}

ProfileSource profile_source_from_string(const std::string& text) {
    if (text == "dataset") return ProfileSource::dataset;
    if (text == "linked-data") return ProfileSource::linked_data;
    if (text == "override") return ProfileSource::override_file;
    throw Error("unknown profile source '" + text + "'");
}

}  // namespace contentcf
