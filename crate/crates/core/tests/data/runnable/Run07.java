public class Run07 {
    public static void main(String[] args) {
        int acc = 0;
        for (int j = 0; j < 10; j++) {
            acc = acc + j * 4;
        }
        System.out.println(acc);
    }
}
