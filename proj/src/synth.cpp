#include "drrag/synth.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <random>
#include <set>
#include <unordered_set>

#include <json.hpp>

#include "drrag/errors.hpp"
#include "drrag/retrievers.hpp"
#include "drrag/util.hpp"

namespace drrag {

namespace {

constexpr const char* kBaseWords[] = {
    "apple", "banana", "cherry", "grape", "lemon", "mango", "peach", "pear", "plum",
    "melon", "berry", "olive", "fig", "date", "kiwi", "almond", "walnut", "pecan",
    "cashew", "hazel", "acorn", "barley", "oat", "wheat", "rye", "corn", "rice",
    "bean", "pea", "lentil", "carrot", "potato", "onion", "garlic", "ginger", "pepper",
    "tomato", "radish", "turnip", "beet", "celery", "spinach", "kale", "basil", "mint",
    "sage", "thyme", "clove", "fennel", "cumin", "paprika", "saffron", "vanilla", "cocoa",
    "coffee", "tea", "milk", "bread", "butter", "cheese", "honey", "sugar", "salt",
    "flour", "yeast", "broth", "soup", "stew", "salad", "toast", "bagel", "river",
    "lake", "ocean", "sea", "pond", "creek", "brook", "stream", "marsh", "swamp",
    "delta", "bay", "gulf", "lagoon", "fjord", "mountain", "hill", "valley", "canyon",
    "cliff", "ridge", "plateau", "plain", "mesa", "dune", "glacier", "summit", "slope",
    "forest", "grove", "meadow", "prairie", "tundra", "desert", "jungle", "thicket", "orchard",
    "garden", "field", "pasture", "stone", "rock", "pebble", "boulder", "gravel", "sand",
    "clay", "soil", "mud", "dust", "ash", "ember", "flame", "spark", "smoke",
    "wind", "breeze", "gale", "storm", "thunder", "lightning", "rain", "drizzle", "hail",
    "sleet", "snow", "frost", "mist", "fog", "cloud", "sky", "horizon", "sunrise",
    "sunset", "dawn", "dusk", "noon", "midnight", "season", "spring", "summer", "autumn",
    "winter", "january", "february", "march", "april", "may", "june", "july", "august",
    "september", "october", "november", "december", "monday", "tuesday", "wednesday", "thursday", "friday",
    "saturday", "sunday", "today", "tomorrow", "wolf", "fox", "bear", "deer", "moose",
    "elk", "bison", "otter", "beaver", "badger", "raccoon", "skunk", "weasel", "marten",
    "lion", "tiger", "leopard", "cheetah", "jaguar", "panther", "cougar", "lynx", "bobcat",
    "hyena", "jackal", "mongoose", "eagle", "hawk", "falcon", "owl", "raven", "crow",
    "sparrow", "robin", "finch", "wren", "swallow", "heron", "crane", "stork", "pelican",
    "gull", "tern", "puffin", "penguin", "ostrich", "emu", "swan", "goose", "duck",
    "teal", "loon", "grebe", "plover", "salmon", "trout", "bass", "pike", "perch",
    "carp", "catfish", "sturgeon", "herring", "sardine", "anchovy", "mackerel", "tuna", "marlin",
    "snapper", "grouper", "flounder", "halibut", "sole", "haddock", "pollock", "whiting", "eel",
    "lamprey", "whale", "dolphin", "porpoise", "seal", "walrus", "manatee", "dugong", "narwhal",
    "orca", "beluga", "krill", "plankton", "spider", "beetle", "ant", "wasp", "hornet",
    "cricket", "locust", "cicada", "mantis", "moth", "butterfly", "dragonfly", "snail", "slug",
    "clam", "oyster", "mussel", "scallop", "crab", "lobster", "shrimp", "prawn", "barnacle",
    "urchin", "coral", "horse", "pony", "donkey", "mule", "camel", "llama", "alpaca",
    "goat", "sheep", "lamb", "cattle", "calf", "swine", "boar", "hog", "rabbit",
    "hare", "squirrel", "chipmunk", "mouse", "rat", "vole", "shrew", "hedgehog", "porcupine",
    "armadillo", "sloth", "monkey", "baboon", "gibbon", "gorilla", "lemur", "tarsier", "marmoset",
    "macaque", "mandrill", "orangutan", "chimp", "lizard", "gecko", "iguana", "chameleon", "skink",
    "monitor", "viper", "cobra", "python", "boa", "adder", "mamba", "krait", "turtle",
    "tortoise", "terrapin", "frog", "toad", "newt", "salamander", "axolotl", "tadpole", "caiman",
    "gharial", "copper", "iron", "steel", "bronze", "brass", "silver", "gold", "platinum",
    "nickel", "zinc", "tin", "lead", "cobalt", "mercury", "titanium", "tungsten", "uranium",
    "radium", "carbon", "silicon", "sulfur", "phosphorus", "oxygen", "hydrogen", "helium", "neon",
    "argon", "krypton", "xenon", "radon", "lithium", "sodium", "potassium", "calcium", "marble",
    "granite", "basalt", "slate", "shale", "limestone", "quartz", "topaz", "ruby", "sapphire",
    "emerald", "opal", "jade", "amber", "pearl", "diamond", "garnet", "zircon", "beryl",
    "agate", "onyx", "jasper", "flint", "obsidian", "pumice", "hammer", "chisel", "wrench",
    "pliers", "saw", "drill", "lathe", "anvil", "forge", "kiln", "loom", "spindle",
    "needle", "thread", "fabric", "cotton", "linen", "wool", "silk", "velvet", "denim",
    "canvas", "burlap", "felt", "suede", "leather", "rope", "twine", "cable", "wire",
    "chain", "hook", "pulley", "lever", "gear", "axle", "wheel", "spoke", "hub",
    "rim", "nail", "screw", "bolt", "rivet", "washer", "gasket", "valve", "piston",
    "crank", "shaft", "bearing", "flange", "socket", "house", "cabin", "cottage", "villa",
    "manor", "castle", "palace", "tower", "keep", "gate", "fence", "hedge", "wall",
    "roof", "floor", "ceiling", "window", "door", "porch", "balcony", "attic", "cellar",
    "pantry", "kitchen", "parlor", "study", "barn", "silo", "stable", "coop", "kennel",
    "hutch", "shed", "garage", "workshop", "mill", "foundry", "refinery", "dock", "bridge",
    "tunnel", "road", "lane", "alley", "avenue", "boulevard", "plaza", "square", "market",
    "bazaar", "arcade", "harbor", "port", "wharf", "pier", "jetty", "quay", "marina",
    "lighthouse", "beacon", "buoy", "anchor", "rudder", "keel", "mast", "sail", "rigging",
    "deck", "hull", "bow", "stern", "galley", "bilge", "ballast", "cargo", "freight",
    "train", "locomotive", "carriage", "wagon", "caboose", "tram", "trolley", "subway", "metro",
    "coach", "sedan", "truck", "lorry", "van", "bus", "taxi", "scooter", "moped",
    "bicycle", "tricycle", "sled", "sleigh", "toboggan", "canoe", "kayak", "raft", "ferry",
    "barge", "tug", "schooner", "sloop", "ketch", "yawl", "clipper", "frigate", "galleon",
    "dinghy", "skiff", "doctor", "nurse", "surgeon", "dentist", "pharmacist", "therapist", "medic",
    "midwife", "veterinarian", "optician", "teacher", "professor", "tutor", "mentor", "scholar", "student",
    "pupil", "apprentice", "novice", "intern", "clerk", "lawyer", "judge", "notary", "bailiff",
    "sheriff", "marshal", "constable", "warden", "ranger", "scout", "sentry", "baker", "butcher",
    "grocer", "farmer", "shepherd", "rancher", "fisher", "hunter", "trapper", "logger", "miner",
    "mason", "carpenter", "plumber", "electrician", "welder", "machinist", "cooper", "smith", "tanner",
    "cobbler", "tailor", "weaver", "potter", "glazier", "painter", "sculptor", "carver", "engraver",
    "printer", "binder", "scribe", "merchant", "trader", "broker", "banker", "cashier", "auditor",
    "actuary", "assessor", "surveyor", "architect", "engineer", "chemist", "physicist", "biologist", "geologist",
    "botanist", "zoologist", "astronomer", "pilot", "captain", "sailor", "navigator", "steward", "porter",
    "courier", "postman", "drayman", "teamster", "drover", "singer", "dancer", "actor", "juggler",
    "acrobat", "magician", "clown", "mime", "bard", "minstrel", "piper", "drummer", "violin",
    "cello", "viola", "harp", "lute", "lyre", "banjo", "mandolin", "guitar", "piano",
    "organ", "flute", "oboe", "clarinet", "bassoon", "trumpet", "trombone", "tuba", "cornet",
    "bugle", "fife", "piccolo", "cymbal", "gong", "chime", "novel", "poem", "sonnet",
    "ballad", "epic", "saga", "fable", "parable", "riddle", "proverb", "motto", "slogan",
    "legend", "chapter", "verse", "stanza", "couplet", "preface", "index", "glossary", "appendix",
    "margin", "footnote", "byline", "letter", "journal", "diary", "ledger", "scroll", "parchment",
    "vellum", "quill", "ink", "blotter", "stamp", "crimson", "scarlet", "vermilion", "maroon",
    "burgundy", "magenta", "fuchsia", "violet", "indigo", "azure", "turquoise", "cyan", "cobaltblue",
    "navy", "beige", "tan", "khaki", "ochre", "sienna", "umber", "sepia", "ivory",
    "cream", "charcoal", "slategray", "pewter", "graphite", "jetblack", "onyxblack", "snowwhite", "pearlwhite",
    "offwhite", "running", "walking", "jumping", "leaping", "crawling", "climbing", "swimming", "diving",
    "rowing", "paddling", "sailing", "gliding", "soaring", "drifting", "floating", "sinking", "rising",
    "falling", "spinning", "turning", "twisting", "bending", "folding", "stretching", "reaching", "grasping",
    "holding", "carrying", "lifting", "pushing", "pulling", "dragging", "sliding", "rolling", "bouncing",
    "skipping", "hopping", "striding", "pacing", "whisper", "murmur", "mutter", "shout", "yell",
    "bellow", "roar", "growl", "snarl", "hiss", "purr", "chirp", "tweet", "warble",
    "trill", "hum", "buzz", "drone", "rustle", "crackle", "snap", "pop", "fizz",
    "sizzle", "gurgle", "splash", "drip", "patter", "thud", "clank", "clang", "rattle",
    "jingle", "tinkle", "creak", "squeak", "groan", "moan", "sigh", "gasp", "bright",
    "dim", "gleaming", "glowing", "shining", "sparkling", "shimmering", "glittering", "radiant", "dull",
    "murky", "gloomy", "shadowy", "misty", "hazy", "foggy", "cloudy", "clear", "transparent",
    "opaque", "translucent", "smooth", "rough", "coarse", "gritty", "silky", "velvety", "slick",
    "sticky", "slippery", "greasy", "waxy", "oily", "warm", "cool", "chilly", "frigid",
    "icy", "frosty", "balmy", "sultry", "humid", "arid", "parched", "soggy", "damp",
    "moist", "sturdy", "fragile", "brittle", "flexible", "rigid", "supple", "limber", "stiff",
    "taut", "slack", "loose", "tight", "swift", "sluggish", "nimble", "agile", "clumsy",
    "graceful", "steady", "wobbly", "shaky", "firm", "feeble", "ancient", "modern", "antique",
    "vintage", "archaic", "primeval", "medieval", "colonial", "classical", "rustic", "humble", "grand",
    "modest", "lavish", "austere", "ornate", "fancy", "simple", "intricate", "elaborate", "quiet",
    "noisy", "silent", "hushed", "loud", "deafening", "faint", "audible", "muffled", "shrill",
    "piercing", "deep", "narrow", "wide", "broad", "vast", "immense", "tiny", "minute",
    "huge", "gigantic", "colossal", "mammoth", "petite", "circle", "triangle", "hexagon", "octagon",
    "pentagon", "rhombus", "ellipse", "sphere", "cube", "prism", "pyramid", "cone", "cylinder",
    "torus", "helix", "spiral", "lattice", "grid", "mesh", "web", "array", "matrix",
    "cluster", "north", "south", "east", "west", "compass", "meridian", "latitude", "longitude",
    "equator", "tropic", "zenith", "anchorage", "harborage", "mooring", "landing", "crossing", "junction",
    "terminus", "depot", "station", "stop", "garnish", "relish", "chutney", "pickle", "brine",
    "vinegar", "mustard", "ketchup", "syrup", "molasses", "treacle", "porridge", "gruel", "dumpling",
    "noodle", "pasta", "ravioli", "gnocchi", "polenta", "risotto", "paella", "tamale", "biscuit",
    "cracker", "wafer", "scone", "muffin", "crumpet", "pretzel", "doughnut", "fritter", "pancake",
    "waffle", "pledge", "oath", "vow", "promise", "charter", "treaty", "pact", "accord",
    "truce", "armistice", "parley", "token", "emblem", "badge", "crest", "sigil", "banner",
    "pennant", "standard", "ensign", "flag", "mascot", "trophy", "wisdom", "courage", "honor",
    "valor", "mercy", "justice", "temperance", "prudence", "patience", "diligence",
};

constexpr std::size_t kBaseWordCount = sizeof(kBaseWords) / sizeof(kBaseWords[0]);

// Query template. All template tokens are distinct so no hash bucket carries
// extra weight in the raw query.
const std::array<std::string, 8> kTemplateTokens = {"who", "is",   "the",   "spouse",
                                                    "of",  "any", "child", "from"};
constexpr const char* kRelationToken = "spouse";

constexpr int kHeadTokens = 5;
constexpr int kBridgeTokens = 7;
constexpr int kDistractorTokens = 7;
constexpr int kMaxResampleRounds = 64;

/// Hands out tokens that are unique for the lifetime of one generation run.
/// Base words come from a seeded shuffle of the built-in list; once the base
/// pool is exhausted, numbered rounds ("word2", "word3", ...) keep tokens
/// unique without bounding corpus size.
class TokenAllocator {
public:
    TokenAllocator(int vocab_size, std::mt19937_64& rng) {
        std::unordered_set<std::string> reserved(kTemplateTokens.begin(), kTemplateTokens.end());
        for (std::size_t i = 0; i < kBaseWordCount; ++i) {
            if (static_cast<int>(base_.size()) >= vocab_size) break;
            if (reserved.count(kBaseWords[i])) continue;
            base_.emplace_back(kBaseWords[i]);
        }
        deterministic_shuffle(base_, rng);
    }

    std::string take() {
        std::size_t round = next_ / base_.size();
        const std::string& word = base_[next_ % base_.size()];
        ++next_;
        return round == 0 ? word : word + std::to_string(round + 1);
    }

    std::vector<std::string> take_n(int n) {
        std::vector<std::string> out;
        out.reserve(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) out.push_back(take());
        return out;
    }

private:
    std::vector<std::string> base_;
    std::size_t next_ = 0;
};

std::string join(const std::vector<std::string>& tokens) {
    std::string out;
    for (const auto& t : tokens) {
        if (!out.empty()) out.push_back(' ');
        out += t;
    }
    return out;
}

std::string zero_pad(int value, int width) {
    std::string digits = std::to_string(value);
    while (static_cast<int>(digits.size()) < width) digits.insert(digits.begin(), '0');
    return digits;
}

struct Instance {
    std::vector<std::string> head;
    std::vector<std::string> bridge;
    std::string answer;
    std::string filler;
    std::vector<std::vector<std::string>> distractors;

    std::string stat_id, dyn_id, query_id;
    std::vector<std::string> distractor_ids;

    std::string query_text() const {
        return "who is the spouse of any child from " + join(head) + "?";
    }
    std::string stat_text() const { return join(head) + " " + join(bridge); }
    std::string dyn_text() const { return join(bridge) + " " + answer + " " + filler; }
    std::string distractor_text(std::size_t m) const {
        return std::string(kRelationToken) + " " + join(distractors[m]);
    }
};

void resample_entities(Instance& inst, TokenAllocator& alloc, bool own_bridge) {
    inst.head = alloc.take_n(kHeadTokens);
    if (own_bridge) inst.bridge = alloc.take_n(kBridgeTokens);
    inst.answer = alloc.take();
    inst.filler = alloc.take();
    for (auto& d : inst.distractors) d = alloc.take_n(kDistractorTokens);
}

void check_disjointness(const Instance& inst) {
    auto as_set = [](const std::string& text) {
        auto tokens = tokenize(text);
        return std::set<std::string>(tokens.begin(), tokens.end());
    };
    std::set<std::string> query = as_set(inst.query_text());
    std::set<std::string> stat = as_set(inst.stat_text());
    std::set<std::string> dyn = as_set(inst.dyn_text());

    for (const auto& t : dyn) {
        if (query.count(t)) {
            throw DataError("synth constraint violated for " + inst.query_id +
                            ": dynamic document shares token \"" + t + "\" with the query");
        }
    }
    for (const auto& b : inst.bridge) {
        if (!dyn.count(b) || !stat.count(b)) {
            throw DataError("synth constraint violated for " + inst.query_id +
                            ": bridge token \"" + b + "\" missing from a gold document");
        }
    }
    for (std::size_t m = 0; m < inst.distractors.size(); ++m) {
        std::set<std::string> dis = as_set(inst.distractor_text(m));
        if (!dis.count(kRelationToken)) {
            throw DataError("synth constraint violated for " + inst.query_id +
                            ": distractor lacks the relation token");
        }
        for (const auto& b : inst.bridge) {
            if (dis.count(b)) {
                throw DataError("synth constraint violated for " + inst.query_id +
                                ": distractor shares bridge token \"" + b + "\"");
            }
        }
    }
}

std::vector<Document> build_documents(const std::vector<Instance>& instances) {
    std::vector<Document> docs;
    for (const Instance& inst : instances) {
        docs.push_back({inst.stat_id, "", inst.stat_text()});
        docs.push_back({inst.dyn_id, "", inst.dyn_text()});
        for (std::size_t m = 0; m < inst.distractors.size(); ++m) {
            docs.push_back({inst.distractor_ids[m], "", inst.distractor_text(m)});
        }
    }
    std::sort(docs.begin(), docs.end(),
              [](const Document& a, const Document& b) { return a.doc_id < b.doc_id; });
    return docs;
}

/// True when the reference-embedder rankings give this instance its intended
/// retrieval behavior.
bool margins_hold(const Instance& inst, const VectorIndex& vectors, std::size_t corpus_size) {
    auto top_raw = vectors.retrieve(inst.query_text(), 2);
    if (top_raw.empty() || top_raw[0].doc_id != inst.stat_id) return false;
    if (corpus_size > 2 && top_raw.size() > 1 && top_raw[1].doc_id == inst.dyn_id &&
        top_raw[1].score > 0.0) {
        return false;  // dynamic doc must stay invisible to the raw query
    }

    Document stat_doc{inst.stat_id, "", inst.stat_text()};
    auto top_expanded = vectors.retrieve(concat_query(inst.query_text(), stat_doc), 2);
    if (top_expanded.size() < 2) return corpus_size < 2;
    return top_expanded[0].doc_id == inst.stat_id && top_expanded[1].doc_id == inst.dyn_id;
}

}  // namespace

SynthData generate(const SynthSpec& spec) {
    if (spec.num_queries < 1) throw DataError("num_queries must be >= 1");
    if (spec.distractors_per_query < 0) throw DataError("distractors_per_query must be >= 0");
    int vocab = spec.vocab_size == 0 ? static_cast<int>(kBaseWordCount) : spec.vocab_size;
    if (vocab < 1) {
        throw DataError("vocab too small to guarantee the disjointness constraints: "
                        "vocab_size must be >= 1");
    }
    if (vocab > static_cast<int>(kBaseWordCount)) {
        throw DataError("vocab_size " + std::to_string(vocab) + " exceeds the built-in list of " +
                        std::to_string(kBaseWordCount) + " words");
    }
    int pool_size = spec.bridge_entity_pool == 0 ? spec.num_queries : spec.bridge_entity_pool;
    if (pool_size < 1) throw DataError("bridge_entity_pool must be >= 1");

    std::mt19937_64 rng(spec.seed);
    TokenAllocator alloc(vocab, rng);

    std::vector<std::vector<std::string>> bridge_pool;
    bridge_pool.reserve(static_cast<std::size_t>(pool_size));
    for (int p = 0; p < pool_size; ++p) bridge_pool.push_back(alloc.take_n(kBridgeTokens));

    // Each query owns its bridge exactly when the pool is at least as large
    // as the query set; owned bridges participate in resampling.
    bool own_bridge = pool_size >= spec.num_queries;

    int id_width = std::max<int>(5, static_cast<int>(std::to_string(spec.num_queries).size()));
    int x_width =
        std::max<int>(2, static_cast<int>(std::to_string(spec.distractors_per_query).size()));

    std::vector<Instance> instances(static_cast<std::size_t>(spec.num_queries));
    for (int i = 0; i < spec.num_queries; ++i) {
        Instance& inst = instances[static_cast<std::size_t>(i)];
        std::string n = zero_pad(i + 1, id_width);
        inst.query_id = "q" + n;
        inst.stat_id = "d" + n + "_stat";
        inst.dyn_id = "d" + n + "_dyn";
        inst.distractors.resize(static_cast<std::size_t>(spec.distractors_per_query));
        for (int m = 0; m < spec.distractors_per_query; ++m) {
            inst.distractor_ids.push_back("d" + n + "_x" + zero_pad(m + 1, x_width));
        }
        inst.bridge = bridge_pool[static_cast<std::size_t>(i) % bridge_pool.size()];
        resample_entities(inst, alloc, false);  // bridge already assigned
    }

    // Verify retrieval margins against the reference embedder, resampling
    // the entity tokens of violating queries. Hash-bucket collisions make a
    // handful of first-draw violations normal; each redraw is independent.
    // Rounds re-check only resampled queries; full sweeps confirm that a
    // resample did not disturb a previously clean query, and two full sweeps
    // without progress end the loop (the honest residue is reported).
    std::vector<std::size_t> all_queries(instances.size());
    for (std::size_t i = 0; i < all_queries.size(); ++i) all_queries[i] = i;

    auto verify = [&](const std::vector<std::size_t>& subset) {
        auto corpus = std::make_shared<CorpusHandle>(build_documents(instances));
        VectorIndex vectors(corpus, std::make_shared<HashedBowEmbedder>());
        std::vector<std::size_t> dirty;
        for (std::size_t i : subset) {
            if (!margins_hold(instances[i], vectors, corpus->size())) dirty.push_back(i);
        }
        return dirty;
    };

    std::size_t violations = 0;
    std::size_t last_full = instances.size() + 1;
    int stalled_sweeps = 0;
    int rounds = 0;
    std::vector<std::size_t> to_check = all_queries;
    while (true) {
        std::vector<std::size_t> dirty = verify(to_check);
        bool full_sweep = to_check.size() == instances.size();
        if (full_sweep) {
            violations = dirty.size();
            if (dirty.empty()) break;
            if (dirty.size() >= last_full) {
                if (++stalled_sweeps >= 2) break;
            } else {
                stalled_sweeps = 0;
            }
            last_full = dirty.size();
        } else if (dirty.empty()) {
            to_check = all_queries;
            continue;
        }
        if (++rounds >= kMaxResampleRounds) {
            violations = verify(all_queries).size();
            break;
        }
        for (std::size_t i : dirty) resample_entities(instances[i], alloc, own_bridge);
        to_check = std::move(dirty);
    }

    for (const Instance& inst : instances) check_disjointness(inst);

    SynthData data;
    data.margin_violations = violations;
    data.corpus = build_documents(instances);
    for (const Instance& inst : instances) {
        QueryRecord q;
        q.query_id = inst.query_id;
        q.text = inst.query_text();
        q.gold_answers = {inst.answer};
        q.gold_doc_ids = {inst.stat_id, inst.dyn_id};
        q.candidates = inst.distractor_ids;
        data.dataset.push_back(std::move(q));
    }
    return data;
}

void write_corpus_jsonl(const std::vector<Document>& corpus, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write file: " + path);
    for (const Document& doc : corpus) {
        nlohmann::json j{{"doc_id", doc.doc_id}, {"title", doc.title}, {"text", doc.text}};
        out << j.dump() << "\n";
    }
}

void write_dataset_jsonl(const std::vector<QueryRecord>& dataset, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write file: " + path);
    for (const QueryRecord& q : dataset) {
        nlohmann::json j{{"query_id", q.query_id},
                         {"question", q.text},
                         {"answers", q.gold_answers},
                         {"gold_doc_ids", q.gold_doc_ids},
                         {"candidates", q.candidates}};
        out << j.dump() << "\n";
    }
}

}  // namespace drrag
