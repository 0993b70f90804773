package corpus;

public class Pipeline {
    interface Stage {
        int apply(int v);
    }

    static class Add implements Stage {
        final int k;

        Add(int k) {
            this.k = k;
        }

        public int apply(int v) {
            return v + k;
        }
    }

    static class Mul implements Stage {
        final int k;

        Mul(int k) {
            this.k = k;
        }

        public int apply(int v) {
            return v * k;
        }
    }

    static class Clamp implements Stage {
        final int lo, hi;

        Clamp(int lo, int hi) {
            this.lo = lo;
            this.hi = hi;
        }

        public int apply(int v) {
            return v < lo ? lo : v > hi ? hi : v;
        }
    }

    static class Chain implements Stage {
        final Stage[] stages;

        Chain(Stage[] s) {
            stages = s;
        }

        public int apply(int v) {
            for (int i = 0; i < stages.length; i++) v = stages[i].apply(v);
            return v;
        }
    }

    static int run(int v) {
        Stage s = new Chain(new Stage[] { new Add(3), new Mul(2), new Clamp(0, 50) });
        return s.apply(v);
    }
}
