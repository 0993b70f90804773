package corpus;

public class Inner {
    private int base = 10;

    class Adder {
        int add(int x) {
            return base + x;
        }
    }

    class Doubler extends Adder {
        int add(int x) {
            return super.add(x) * 2;
        }
    }

    public int compute(int x) {
        Adder a = x > 0 ? new Doubler() : new Adder();
        return a.add(x);
    }

    public Runnable incrementer() {
        return new Runnable() {
            public void run() {
                base++;
            }
        };
    }

    public int afterRuns(int n) {
        Runnable r = incrementer();
        for (int i = 0; i < n; i++) {
            r.run();
        }
        return base;
    }
}
