#include "doctest.h"

#include "coordparse/checkpoint.hpp"
#include "coordparse/datagen.hpp"
#include "coordparse/training.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

using namespace coordparse;
using namespace coordparse::training;

namespace {

DatasetSplit small_split() {
    auto g = datagen::load_grammar("data/grammar", {"Time", "FoodItem"});
    datagen::GenConfig cfg;
    cfg.corpus_size = 120;
    cfg.seed = 5;
    return datagen::generate_corpus(g, cfg);
}

TrainConfig small_config() {
    TrainConfig c;
    c.model.use_char = false;
    c.model.use_word = true;
    c.model.word_emb_dim = 16;
    c.model.word_hidden = 12;
    c.model.loss = DecoderLoss::kSoftmaxCe;
    c.batch_size = 16;
    c.max_epochs = 3;
    c.seed = 9;
    return c;
}

std::string file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

}  // namespace

TEST_CASE("training twice with one seed is bitwise reproducible") {
    auto split = small_split();
    auto cfg = small_config();
    TrainResult a = train(cfg, split);
    TrainResult b = train(cfg, split);

    REQUIRE(a.log.size() == b.log.size());
    for (size_t i = 0; i < a.log.size(); ++i) CHECK(a.log[i].to_json() == b.log[i].to_json());
    CHECK(a.best_epoch == b.best_epoch);

    save_checkpoint(a.model, "build/_train_a.ckpt");
    save_checkpoint(b.model, "build/_train_b.ckpt");
    CHECK(file_bytes("build/_train_a.ckpt") == file_bytes("build/_train_b.ckpt"));
    std::remove("build/_train_a.ckpt");
    std::remove("build/_train_b.ckpt");

    TrainConfig other = cfg;
    other.seed = 10;
    TrainResult c = train(other, split);
    bool same = a.log.size() == c.log.size();
    if (same)
        for (size_t i = 0; i < a.log.size(); ++i)
            if (a.log[i].to_json() != c.log[i].to_json()) same = false;
    CHECK(!same);
}

TEST_CASE("best checkpoint tracks the best validation accuracy in the log") {
    auto split = small_split();
    auto cfg = small_config();
    cfg.max_epochs = 4;
    TrainResult r = train(cfg, split);
    REQUIRE(!r.log.empty());
    double best = -1.0;  // mirrors the trainer: strict improvement, first epoch wins ties
    int best_epoch = -1;
    for (const auto& e : r.log) {
        if (e.val_accuracy > best) {
            best = e.val_accuracy;
            best_epoch = e.epoch;
        }
    }
    CHECK(r.best_val_accuracy == doctest::Approx(best));
    CHECK(r.best_epoch == best_epoch);
}

TEST_CASE("zero epochs yields an untrained model and empty log") {
    auto split = small_split();
    auto cfg = small_config();
    cfg.max_epochs = 0;
    TrainResult r = train(cfg, split);
    CHECK(r.log.empty());
    CHECK(r.best_epoch == -1);
    // still usable for inference
    auto tags = r.model.predict(split.test[0].tokens);
    CHECK(tags.size() == split.test[0].tokens.size());
}

TEST_CASE("checkpoint round trip is bit exact and preserves predictions") {
    auto split = small_split();
    auto cfg = small_config();
    cfg.max_epochs = 1;
    TrainResult r = train(cfg, split);

    save_checkpoint(r.model, "build/_ckpt1.bin");
    TaggerModel<float> back = load_checkpoint("build/_ckpt1.bin");
    save_checkpoint(back, "build/_ckpt2.bin");
    CHECK(file_bytes("build/_ckpt1.bin") == file_bytes("build/_ckpt2.bin"));
    CHECK(model_size("build/_ckpt1.bin") == file_bytes("build/_ckpt1.bin").size());

    for (int i = 0; i < 5; ++i) {
        const auto& u = split.test[i];
        CHECK(r.model.predict(u.tokens) == back.predict(u.tokens));
    }
    std::remove("build/_ckpt1.bin");
    std::remove("build/_ckpt2.bin");
}

TEST_CASE("config parsing covers encoders and loss") {
    TrainConfig c = parse_train_config(R"({
        "char_encoder": "bilstm", "word_encoder": "none", "loss": "crf",
        "word_emb_dim": 50, "word_hidden": 40, "char_emb_dim": 20, "char_hidden": 25,
        "adversarial": true, "batch_size": 8, "max_epochs": 2, "patience": 3,
        "lr": 0.001, "seed": 4
    })");
    CHECK(c.model.use_char);
    CHECK(!c.model.use_word);
    CHECK(c.model.loss == DecoderLoss::kCrf);
    CHECK(c.model.char_hidden == 25);
    CHECK(c.model.adversarial);
    CHECK(c.batch_size == 8);
    CHECK(c.patience == 3);
    CHECK(c.lr == doctest::Approx(0.001));
    CHECK(c.seed == 4);
    CHECK_THROWS(parse_train_config(R"({"word_encoder": "none"})"));
    CHECK_THROWS(parse_train_config(R"({"loss": "hinge"})"));
    CHECK_THROWS(parse_train_config("not json"));
}

TEST_CASE("char-only checkpoints undercut word-only ones on a large vocabulary") {
    // synthetic corpus with ~10k distinct words built from two-letter stems
    std::vector<LabeledUtterance> rows;
    int counter = 0;
    for (int i = 0; i < 5000 && counter < 10000; ++i) {
        LabeledUtterance u;
        u.tokens = {"w" + std::to_string(counter), "and", "w" + std::to_string(counter + 1)};
        counter += 2;
        u.tags = {Tag::BC, Tag::CC, Tag::BC};
        u.slot_type = "X";
        u.conjunct_count = 2;
        rows.push_back(u);
    }
    DatasetSplit split;
    split.train = rows;
    split.validation = {rows[0]};
    split.test = {rows[1]};

    TrainConfig word_cfg = small_config();
    word_cfg.model.word_emb_dim = 100;
    word_cfg.model.word_hidden = 50;
    word_cfg.max_epochs = 0;

    TrainConfig char_cfg = word_cfg;
    char_cfg.model.use_word = false;
    char_cfg.model.use_char = true;
    char_cfg.model.char_emb_dim = 100;
    char_cfg.model.char_hidden = 50;

    TrainResult wr = train(word_cfg, split);
    TrainResult cr = train(char_cfg, split);
    save_checkpoint(wr.model, "build/_word.ckpt");
    save_checkpoint(cr.model, "build/_char.ckpt");
    CHECK(model_size("build/_char.ckpt") < model_size("build/_word.ckpt"));
    std::remove("build/_word.ckpt");
    std::remove("build/_char.ckpt");
}
