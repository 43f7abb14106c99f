#include "meddial/synth.hpp"

#include <algorithm>
#include <random>

#include "meddial/util.hpp"

namespace meddial {

namespace {

const char* kSymptomPool[] = {"腹痛", "胃痛", "反酸", "烧心", "腹泻", "恶心",
                              "呕吐", "便血", "头晕", "乏力", "腹胀", "嗳气"};
const char* kDiseasePool[] = {"胃炎", "胃溃疡", "肠炎", "反流性食管炎", "消化不良", "幽门螺杆菌感染"};
const char* kMedicinePool[] = {"奥美拉唑", "铝碳酸镁", "莫沙必利", "益生菌", "蒙脱石散"};
const char* kExamPool[] = {"胃镜", "腹部B超", "血常规", "碳13呼气试验"};
const char* kAttributePool[] = {"病程", "饮食", "睡眠", "情绪"};
const char* kRelationPool[] = {"相关症状", "治疗药物", "推荐检查", "并发疾病", "相关因素"};

struct Pool {
    const char** names;
    std::size_t size;
    EntityType type;
};

std::vector<std::string> pick_entities(const std::vector<std::string>& canonicals,
                                       std::mt19937_64& rng, std::size_t max_count) {
    std::vector<std::string> out;
    const std::size_t count = uniform_below(rng, max_count + 1);
    for (std::size_t i = 0; i < count && !canonicals.empty(); ++i) {
        const std::string& name = canonicals[uniform_below(rng, canonicals.size())];
        if (std::find(out.begin(), out.end(), name) == out.end()) out.push_back(name);
    }
    return out;
}

} // namespace

Lexicon make_synthetic_lexicon(const SynthConfig& cfg) {
    const Pool pools[] = {
        {kSymptomPool, std::size(kSymptomPool), EntityType::Symptom},
        {kDiseasePool, std::size(kDiseasePool), EntityType::Disease},
        {kMedicinePool, std::size(kMedicinePool), EntityType::Medicine},
        {kExamPool, std::size(kExamPool), EntityType::Examination},
        {kAttributePool, std::size(kAttributePool), EntityType::Attribute},
    };
    Lexicon lex;
    std::size_t added = 0;
    for (std::size_t round = 0; added < cfg.entities; ++round) {
        bool any = false;
        for (const Pool& pool : pools) {
            if (round < pool.size && added < cfg.entities) {
                lex.add(pool.names[round], pool.names[round], pool.type);
                ++added;
                any = true;
            }
        }
        if (!any) break; // pools exhausted
    }
    return lex;
}

KnowledgeGraph make_synthetic_graph(const Lexicon& lex, const SynthConfig& cfg) {
    std::mt19937_64 rng(cfg.seed ^ 0xA5A5A5A5ull);
    std::vector<std::string> nodes = lex.canonicals();
    for (std::size_t i = 0; i < cfg.extra_nodes; ++i) {
        nodes.push_back("概念" + std::to_string(i));
    }
    std::vector<Triplet> triplets;
    triplets.reserve(cfg.triplets);
    for (std::size_t i = 0; i < cfg.triplets; ++i) {
        const std::string& head = nodes[uniform_below(rng, nodes.size())];
        const std::string& tail = nodes[uniform_below(rng, nodes.size())];
        if (head == tail) continue;
        const char* rel = kRelationPool[uniform_below(rng, std::size(kRelationPool))];
        triplets.push_back(Triplet{head, rel, tail});
    }
    return KnowledgeGraph::from_triplets(std::move(triplets));
}

std::vector<Dialogue> make_synthetic_corpus(const Lexicon& lex, const SynthConfig& cfg) {
    std::mt19937_64 rng(cfg.seed ^ 0x5C5C5C5Cull);
    const auto canonicals = lex.canonicals();

    std::vector<Dialogue> corpus;
    corpus.reserve(cfg.dialogues);
    for (std::size_t d = 0; d < cfg.dialogues; ++d) {
        Dialogue dlg;
        dlg.id = "synth-" + std::to_string(d);
        dlg.split = Split::Test;
        const std::size_t exchanges = 1 + uniform_below(rng, cfg.max_exchanges);
        for (std::size_t x = 0; x < exchanges; ++x) {
            Utterance patient;
            patient.role = Role::Patient;
            const auto p_ents = pick_entities(canonicals, rng, 2);
            patient.text = x == 0 ? "医生您好,我最近" : "还有就是";
            for (const std::string& e : p_ents) patient.text += e + "的情况,";
            patient.text += "请问要紧吗?";
            for (const std::string& e : p_ents) {
                patient.entities.push_back(
                    EntityMention{e, *lex.canonical_type(e), std::nullopt});
            }
            dlg.turns.push_back(std::move(patient));

            Utterance doctor;
            doctor.role = Role::Doctor;
            const auto d_ents = pick_entities(canonicals, rng, 3);
            doctor.text = "您好,结合您的描述,";
            for (const std::string& e : d_ents) doctor.text += "需要注意" + e + ",";
            doctor.text += "建议规律作息并观察变化。";
            for (const std::string& e : d_ents) {
                doctor.entities.push_back(
                    EntityMention{e, *lex.canonical_type(e), std::nullopt});
            }
            const std::size_t action_count = uniform_below(rng, 3);
            for (std::size_t a = 0; a < action_count; ++a) {
                const auto act = static_cast<PhysicianAction>(
                    uniform_below(rng, kPhysicianActionCount));
                if (std::find(doctor.actions.begin(), doctor.actions.end(), act) ==
                    doctor.actions.end()) {
                    doctor.actions.push_back(act);
                }
            }
            dlg.turns.push_back(std::move(doctor));
        }
        corpus.push_back(std::move(dlg));
    }
    return corpus;
}

} // namespace meddial
